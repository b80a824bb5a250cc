#pragma once

#include <string>
#include <string_view>

namespace reliance::corpus {

// Porter stemming, the original 1980 rule set (steps 1a-5b).
// Tokens of length <= 2 and tokens containing anything other than a-z are
// returned unchanged.
std::string porter_stem(std::string_view token);

}  // namespace reliance::corpus
