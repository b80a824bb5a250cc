#include "reliance/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "reliance/errors.hpp"
#include "reliance/porter.hpp"
#include "reliance/rng.hpp"

namespace reliance::corpus {
namespace {

// Bytes >= 0x80 are treated as word characters so multi-byte UTF-8 words
// survive tokenization intact; only ASCII is case-folded.
bool is_word_char(unsigned char c) {
    return c >= 0x80 || std::isalnum(c) != 0;
}

bool is_space(unsigned char c) {
    return c < 0x80 && std::isspace(c) != 0;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

bool has_word_char(const std::string& s) {
    return std::any_of(s.begin(), s.end(),
                       [](char c) { return is_word_char(static_cast<unsigned char>(c)); });
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// RFC 4180 style reader: quoted fields, "" escapes, fields spanning lines.
class CsvReader {
  public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Returns false at end of input. Throws MalformedCsvError on an
    // unterminated quote.
    bool next_row(std::vector<std::string>& fields) {
        fields.clear();
        int c = in_.get();
        if (c == EOF) return false;

        std::string field;
        bool in_quotes = false;
        bool saw_any = false;
        while (true) {
            if (c == EOF) {
                if (in_quotes) throw MalformedCsvError("unterminated quoted field");
                break;
            }
            char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        field.push_back('"');
                        in_.get();
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field.push_back(ch);
                }
            } else if (ch == '"' && field.empty() && !saw_any_in_field_) {
                in_quotes = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
                saw_any_in_field_ = false;
                saw_any = true;
                c = in_.get();
                continue;
            } else if (ch == '\n') {
                break;
            } else if (ch == '\r') {
                if (in_.peek() == '\n') in_.get();
                break;
            } else {
                field.push_back(ch);
            }
            saw_any_in_field_ = true;
            c = in_.get();
        }
        fields.push_back(std::move(field));
        saw_any_in_field_ = false;
        (void)saw_any;
        return true;
    }

  private:
    std::istream& in_;
    bool saw_any_in_field_ = false;
};

std::optional<std::string> cell_to_optional(std::string&& cell) {
    if (cell.empty()) return std::nullopt;
    return std::move(cell);
}

std::int64_t parse_id(const std::string& cell, std::size_t row) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw MalformedCsvError("row " + std::to_string(row) + ": id is not an integer: '" +
                                cell + "'");
    return value;
}

}  // namespace

StopwordList::StopwordList(std::vector<std::string> words) {
    for (auto& w : words) entries_.insert(to_lower(w));
}

StopwordList StopwordList::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stopword list: " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) words.push_back(line);
    }
    if (words.empty()) throw DataError("stopword list is empty: " + path);
    return StopwordList(std::move(words));
}

std::vector<std::string> StopwordList::sorted_entries() const {
    std::vector<std::string> sorted(entries_.begin(), entries_.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted;
}

std::uint64_t StopwordList::checksum() const {
    std::vector<std::string> sorted = sorted_entries();
    std::string joined;
    for (const auto& w : sorted) {
        joined += w;
        joined += '\n';
    }
    return fnv1a64(joined);
}

std::vector<RawRecord> load_dataset(const std::string& path, bool expect_labels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset: " + path);

    // Strip a UTF-8 BOM if present.
    if (in.peek() == 0xEF) {
        char bom[3];
        in.read(bom, 3);
        if (in.gcount() != 3 || bom[1] != char(0xBB) || bom[2] != char(0xBF)) {
            in.clear();
            in.seekg(0);
        }
    }

    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next_row(header)) throw MalformedCsvError("empty file: " + path);

    auto column = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (to_lower(header[i]) == name) return static_cast<int>(i);
        return -1;
    };
    int id_col = column("id");
    int title_col = column("title");
    int author_col = column("author");
    int text_col = column("text");
    int label_col = column("label");
    if (id_col < 0) throw MissingColumnError("missing column 'id' in " + path);
    if (title_col < 0) throw MissingColumnError("missing column 'title' in " + path);
    if (author_col < 0) throw MissingColumnError("missing column 'author' in " + path);
    if (text_col < 0) throw MissingColumnError("missing column 'text' in " + path);
    if (expect_labels && label_col < 0)
        throw MissingColumnError("missing column 'label' in " + path);

    std::vector<RawRecord> records;
    std::vector<std::string> fields;
    std::size_t row = 1;
    while (reader.next_row(fields)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
        if (fields.size() != header.size())
            throw MalformedCsvError("row " + std::to_string(row) + ": expected " +
                                    std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
        RawRecord rec;
        rec.id = parse_id(fields[static_cast<std::size_t>(id_col)], row);
        rec.title = cell_to_optional(std::move(fields[static_cast<std::size_t>(title_col)]));
        rec.author = cell_to_optional(std::move(fields[static_cast<std::size_t>(author_col)]));
        rec.body = cell_to_optional(std::move(fields[static_cast<std::size_t>(text_col)]));
        if (label_col >= 0) {
            std::string cell = fields[static_cast<std::size_t>(label_col)];
            while (!cell.empty() && is_space(static_cast<unsigned char>(cell.back())))
                cell.pop_back();
            while (!cell.empty() && is_space(static_cast<unsigned char>(cell.front())))
                cell.erase(cell.begin());
            if (!cell.empty()) {
                if (cell == "0")
                    rec.label = 0;
                else if (cell == "1")
                    rec.label = 1;
                else
                    throw BadLabelError("row " + std::to_string(row) + ": label '" + cell +
                                        "' is not 0 or 1");
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= n) break;
        std::size_t start = i;
        while (i < n && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        std::string_view piece(text.data() + start, i - start);

        // Peel punctuation off both edges; each peeled char is its own token.
        std::size_t lo = 0;
        std::size_t hi = piece.size();
        while (lo < hi && !is_word_char(static_cast<unsigned char>(piece[lo]))) ++lo;
        while (hi > lo && !is_word_char(static_cast<unsigned char>(piece[hi - 1]))) --hi;
        for (std::size_t p = 0; p < lo; ++p) out.emplace_back(1, piece[p]);
        if (lo < hi) out.emplace_back(piece.substr(lo, hi - lo));
        for (std::size_t p = hi; p < piece.size(); ++p) out.emplace_back(1, piece[p]);
    }
    return out;
}

std::vector<std::string> normalize(const std::vector<std::string>& tokens,
                                   const StopwordList& stopwords) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        std::string lower = to_lower(t);
        if (!has_word_char(lower)) continue;
        if (stopwords.contains(lower)) continue;
        out.push_back(std::move(lower));
    }
    return out;
}

Document preprocess(const RawRecord& record, const StopwordList& stopwords) {
    if (!record.body.has_value())
        throw MissingTextError("record " + std::to_string(record.id) + " has no text");
    std::string text;
    if (record.title.has_value()) {
        text = *record.title;
        text += ' ';
    }
    text += *record.body;

    Document doc;
    doc.id = record.id;
    doc.label = record.label;
    doc.tokens = normalize(tokenize(text), stopwords);
    for (auto& t : doc.tokens) t = porter_stem(t);
    return doc;
}

std::string cache_line(const Document& doc) {
    std::string line = std::to_string(doc.id);
    line += '\t';
    line += doc.label ? std::to_string(*doc.label) : "-";
    line += '\t';
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        if (i) line += ' ';
        line += doc.tokens[i];
    }
    return line;
}

Document parse_cache_line(const std::string& line) {
    std::size_t tab1 = line.find('\t');
    std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) throw DataError("malformed cache line: " + line);
    Document doc;
    doc.id = parse_id(line.substr(0, tab1), 0);
    std::string label = line.substr(tab1 + 1, tab2 - tab1 - 1);
    if (label == "0")
        doc.label = 0;
    else if (label == "1")
        doc.label = 1;
    else if (label != "-")
        throw BadLabelError("cache label '" + label + "' is not 0, 1 or -");
    std::istringstream toks(line.substr(tab2 + 1));
    std::string tok;
    while (toks >> tok) doc.tokens.push_back(tok);
    return doc;
}

void write_cache(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write cache: " + path);
    for (const auto& d : docs) out << cache_line(d) << '\n';
}

std::vector<Document> read_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open cache: " + path);
    std::vector<Document> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        docs.push_back(parse_cache_line(line));
    }
    return docs;
}

std::vector<Document> synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    auto word = [](const char* prefix, int n) { return std::string(prefix) + std::to_string(n); };

    std::vector<Document> docs;
    std::int64_t next_id = 0;
    for (int topic = 0; topic < 2; ++topic) {
        const char* prefix = topic == 0 ? "reala" : "fakeb";
        for (int d = 0; d < spec.docs_per_topic; ++d) {
            Document doc;
            doc.id = next_id++;
            doc.label = topic;
            int len = spec.min_tokens +
                      static_cast<int>(rng.next_below(
                          static_cast<std::uint64_t>(spec.max_tokens - spec.min_tokens + 1)));
            doc.tokens.reserve(static_cast<std::size_t>(len));
            for (int t = 0; t < len; ++t) {
                if (spec.shared_vocab > 0 && rng.next_double() < spec.shared_fraction)
                    doc.tokens.push_back(word("common", static_cast<int>(rng.next_below(
                                                            static_cast<std::uint64_t>(
                                                                spec.shared_vocab)))));
                else
                    doc.tokens.push_back(word(prefix, static_cast<int>(rng.next_below(
                                                          static_cast<std::uint64_t>(
                                                              spec.topic_vocab)))));
            }
            docs.push_back(std::move(doc));
        }
    }
    return docs;
}

}  // namespace reliance::corpus
