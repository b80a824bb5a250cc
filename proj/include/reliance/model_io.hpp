#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reliance/base_models.hpp"
#include "reliance/bundle.hpp"
#include "reliance/corpus.hpp"
#include "reliance/embed.hpp"
#include "reliance/ensemble.hpp"
#include "reliance/nn.hpp"

namespace reliance::cli {

std::vector<std::uint8_t> encode_doc2vec(const embed::Doc2VecModel& model);
embed::Doc2VecModel decode_doc2vec(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_logreg(const models::LogRegModel& model);
models::LogRegModel decode_logreg(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_svm(const models::SvmModel& model);
models::SvmModel decode_svm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_forest(const models::ForestModel& model);
models::ForestModel decode_forest(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_mnb(const models::MnbModel& model);
models::MnbModel decode_mnb(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_bilstm(const models::BiLstmModel& model);
models::BiLstmModel decode_bilstm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_mlp(const nn::MlpModel& model);
nn::MlpModel decode_mlp(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_stopwords(const corpus::StopwordList& stopwords);
corpus::StopwordList decode_stopwords(std::span<const std::uint8_t> bytes);

// Full deployment bundle: doc2vec + the five base models + the meta model +
// the stopword list, with the meta-feature column order in the manifest.
Bundle make_stack_bundle(const embed::Doc2VecModel& doc2vec,
                         const ensemble::StackingModel& stack,
                         const corpus::StopwordList& stopwords,
                         const std::string& config_digest, const std::string& created_at);

struct LoadedStack {
    embed::Doc2VecModel doc2vec;
    ensemble::StackingModel stack;
    corpus::StopwordList stopwords;
};
LoadedStack load_stack_bundle(const Bundle& bundle);

}  // namespace reliance::cli
