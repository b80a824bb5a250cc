#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace reliance::corpus {

// One row of the raw dataset. Label convention: 1 = unreliable/fake,
// 0 = reliable/real.
struct RawRecord {
    std::int64_t id = 0;
    std::optional<std::string> title;
    std::optional<std::string> author;
    std::optional<std::string> body;
    std::optional<int> label;
};

// A news item after preprocessing: lowercase stems in original order.
struct Document {
    std::int64_t id = 0;
    std::vector<std::string> tokens;
    std::optional<int> label;

    bool operator==(const Document&) const = default;
};

class StopwordList {
  public:
    StopwordList() = default;
    explicit StopwordList(std::vector<std::string> words);

    static StopwordList load(const std::string& path);

    bool contains(const std::string& lowercase_word) const {
        return entries_.count(lowercase_word) > 0;
    }
    std::size_t size() const { return entries_.size(); }
    std::vector<std::string> sorted_entries() const;
    // FNV-1a 64 over the sorted entries joined with newlines; pins the shipped list.
    std::uint64_t checksum() const;

  private:
    std::unordered_set<std::string> entries_;
};

// Reads the CSV corpus (header `id,title,author,text[,label]`, standard
// quoting, quoted fields may span lines). Empty cells become absent optionals.
std::vector<RawRecord> load_dataset(const std::string& path, bool expect_labels);

// Whitespace split, then leading/trailing punctuation detached as
// single-character tokens; word-internal punctuation stays put.
std::vector<std::string> tokenize(const std::string& text);

// Lowercases (ASCII), drops stopwords and tokens without an alphanumeric
// character, preserves order.
std::vector<std::string> normalize(const std::vector<std::string>& tokens,
                                   const StopwordList& stopwords);

// tokenize -> normalize -> porter_stem over title + " " + body.
// Throws MissingTextError when the body is absent.
Document preprocess(const RawRecord& record, const StopwordList& stopwords);

// Cache file: one record per line, `id<TAB>label<TAB>space-joined-tokens`,
// label `-` when absent.
void write_cache(const std::vector<Document>& docs, const std::string& path);
std::vector<Document> read_cache(const std::string& path);
std::string cache_line(const Document& doc);
Document parse_cache_line(const std::string& line);

// Two-topic corpus with disjoint topic vocabularies plus a shared pool;
// stands in for the real dataset in desk runs when no CSV is available.
// Topic 1 documents carry label 1 (fake).
struct SyntheticSpec {
    int docs_per_topic = 100;
    int min_tokens = 30;
    int max_tokens = 60;
    int topic_vocab = 50;
    int shared_vocab = 20;
    double shared_fraction = 0.3;
};
std::vector<Document> synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace reliance::corpus
