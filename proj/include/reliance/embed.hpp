#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "reliance/corpus.hpp"
#include "reliance/matrix.hpp"
#include "reliance/rng.hpp"

namespace reliance::embed {

class Vocabulary {
  public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> tokens, std::vector<std::int64_t> counts);

    int size() const { return static_cast<int>(tokens_.size()); }
    // -1 when the token is not in the vocabulary.
    int index_of(const std::string& token) const;
    const std::string& token(int index) const { return tokens_[static_cast<std::size_t>(index)]; }
    std::int64_t count(int index) const { return counts_[static_cast<std::size_t>(index)]; }
    std::int64_t total_count() const { return total_; }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }

  private:
    std::vector<std::string> tokens_;
    std::vector<std::int64_t> counts_;
    std::unordered_map<std::string, int> index_;
    std::int64_t total_ = 0;
};

// Indices ordered by descending count, ties broken lexicographically.
Vocabulary build_vocab(const std::vector<corpus::Document>& docs, int min_count);

// Draws negatives from the unigram^(3/4) distribution via the alias method
// (exact, O(1) per draw).
class UnigramTable {
  public:
    UnigramTable() = default;
    explicit UnigramTable(const std::vector<std::int64_t>& counts, double power = 0.75);

    int sample(Rng& rng) const {
        const std::size_t k = static_cast<std::size_t>(rng.next_below(prob_.size()));
        return rng.next_double() < prob_[k] ? static_cast<int>(k) : alias_[k];
    }
    std::size_t size() const { return prob_.size(); }

  private:
    std::vector<double> prob_;
    std::vector<int> alias_;
};

struct Doc2VecConfig {
    int dim = 1200;
    int min_count = 1;
    int epochs = 50;
    int window = 5;
    int negative = 5;
    double initial_lr = 0.025;
    double min_lr = 1e-4;  // linear decay floor
    std::uint64_t seed = 42;
};

// PV-DM with negative sampling. The hidden state at a position is the mean
// of the document vector and the in-window context word vectors.
struct Doc2VecModel {
    nn::Matrix word_in;   // V x dim (context side)
    nn::Matrix doc_vecs;  // N x dim
    nn::Matrix word_out;  // V x dim (prediction side)
    Vocabulary vocab;
    Doc2VecConfig config;
    UnigramTable table;
    std::vector<std::int64_t> doc_ids;  // row -> document id
    std::unordered_map<std::int64_t, int> doc_row;
    std::vector<double> epoch_objective;  // mean log-likelihood per epoch

    int dim() const { return config.dim; }
    std::span<const double> doc_vector(std::int64_t id) const;
};

// threads = 0 runs the sequential deterministic path; threads > 1 uses
// unsynchronized concurrent updates (results then vary run to run).
Doc2VecModel train_doc2vec(const std::vector<corpus::Document>& docs,
                           const Doc2VecConfig& config, int threads = 0);

// Optimizes a fresh document vector against frozen word matrices; `steps`
// full passes over the token list. Unknown tokens are skipped.
std::vector<double> infer_vector(const Doc2VecModel& model,
                                 const std::vector<std::string>& tokens, int steps,
                                 std::uint64_t seed);

// Row i = trained vector of docs[i]. Throws UnknownDocumentError.
nn::Matrix embed_corpus(const Doc2VecModel& model, const std::vector<corpus::Document>& docs);

// Unit-norm feature rows. Trained and inferred vectors drift in magnitude
// (fewer co-adapting updates at inference), so downstream models consume
// documents on the unit sphere; zero vectors stay zero.
void l2_normalize(std::span<double> v);
void l2_normalize_rows(nn::Matrix& m);

// Per-position negative-sampling objective and its analytic gradients,
// shared by training and the finite-difference checks.
//   objective = log sigmoid(u_t . h) + sum_n log sigmoid(-u_n . h)
double ns_objective(std::span<const double> hidden, const nn::Matrix& word_out, int target,
                    std::span<const int> negatives);
void ns_gradients(std::span<const double> hidden, const nn::Matrix& word_out, int target,
                  std::span<const int> negatives, std::span<double> grad_hidden,
                  nn::Matrix& grad_word_out);

}  // namespace reliance::embed
