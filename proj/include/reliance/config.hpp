#pragma once

#include <cstdint>
#include <string>

#include "reliance/experiment.hpp"

namespace reliance::cli {

// JSON run configuration. Unknown keys are rejected. Profiles:
//   desk   - dim 100, 20 doc2vec epochs, 20% stratified subsample, 256 MB
//            SVM kernel cache
//   full   - locks dim 1200, 50 epochs, 80-20 split
//   custom - no profile defaults, everything from the file
struct RunConfig {
    std::string profile = "desk";
    std::string dataset;  // empty: synthetic corpus
    std::string output_dir = "out";
    std::string stopwords = "data/stopwords_en.txt";
    std::uint64_t seed = 42;
    int threads = 0;  // 0 = sequential deterministic

    eval::ExperimentConfig experiment;  // leaf settings, profile-adjusted

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);

    // FNV-1a 64 hex over the canonical JSON of every semantic field.
    std::string digest() const;
};

}  // namespace reliance::cli
