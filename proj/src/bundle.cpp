#include "reliance/bundle.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "reliance/errors.hpp"

namespace reliance::cli {
namespace {

using nlohmann::json;

constexpr std::array<char, 4> kMagic = {'R', 'L', 'N', 'C'};

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    static const auto table = make_crc_table();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::uint8_t b : bytes) c = table[(c ^ b) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void BlobWriter::put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BlobWriter::put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BlobWriter::put_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(bits);
}

void BlobWriter::put_string(const std::string& s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void BlobWriter::put_f64_array(std::span<const double> values) {
    put_u64(values.size());
    for (double v : values) put_f64(v);
}

void BlobWriter::put_i64_array(std::span<const std::int64_t> values) {
    put_u64(values.size());
    for (std::int64_t v : values) put_i64(v);
}

void BlobReader::need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw BundleFormatError("blob truncated");
}

std::uint8_t BlobReader::get_u8() {
    need(1);
    return bytes_[pos_++];
}

std::uint32_t BlobReader::get_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
}

std::uint64_t BlobReader::get_u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
}

double BlobReader::get_f64() {
    const std::uint64_t bits = get_u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

std::string BlobReader::get_string() {
    const std::uint32_t n = get_u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
}

std::vector<double> BlobReader::get_f64_array() {
    const std::uint64_t n = get_u64();
    need(n * 8);
    std::vector<double> out(n);
    for (std::uint64_t i = 0; i < n; ++i) out[i] = get_f64();
    return out;
}

std::vector<std::int64_t> BlobReader::get_i64_array() {
    const std::uint64_t n = get_u64();
    need(n * 8);
    std::vector<std::int64_t> out(n);
    for (std::uint64_t i = 0; i < n; ++i) out[i] = get_i64();
    return out;
}

const BundleComponent* Bundle::find(const std::string& name) const {
    for (const auto& c : components)
        if (c.name == name) return &c;
    return nullptr;
}

const BundleComponent& Bundle::require(const std::string& name) const {
    const BundleComponent* c = find(name);
    if (!c) throw BundleFormatError("bundle is missing component '" + name + "'");
    return *c;
}

void Bundle::save(const std::string& path) const {
    json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["created_at"] = created_at;
    manifest["config_digest"] = config_digest;
    if (!extra.empty()) manifest["extra"] = extra;
    json comps = json::array();
    std::uint64_t offset = 0;
    for (const auto& c : components) {
        comps.push_back({{"name", c.name},
                         {"offset", offset},
                         {"length", c.payload.size()},
                         {"crc32", crc32(c.payload)}});
        offset += c.payload.size();
    }
    manifest["components"] = comps;
    const std::string manifest_text = manifest.dump();

    BlobWriter header;
    for (char m : kMagic) header.put_u8(static_cast<std::uint8_t>(m));
    header.put_u32(kFormatVersion);
    header.put_u64(manifest_text.size());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write bundle: " + path);
    out.write(reinterpret_cast<const char*>(header.bytes().data()),
              static_cast<std::streamsize>(header.bytes().size()));
    out.write(manifest_text.data(), static_cast<std::streamsize>(manifest_text.size()));
    for (const auto& c : components)
        out.write(reinterpret_cast<const char*>(c.payload.data()),
                  static_cast<std::streamsize>(c.payload.size()));
    if (!out) throw DataError("write failed: " + path);
}

Bundle Bundle::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open bundle: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    BlobReader reader(bytes);
    for (char m : kMagic)
        if (reader.get_u8() != static_cast<std::uint8_t>(m))
            throw BundleFormatError("bad magic in " + path);
    const std::uint32_t version = reader.get_u32();
    if (version != kFormatVersion)
        throw BundleFormatError("unsupported bundle version " + std::to_string(version));
    const std::uint64_t manifest_len = reader.get_u64();
    if (16 + manifest_len > bytes.size()) throw BundleFormatError("manifest truncated");

    const json manifest = json::parse(
        std::string(reinterpret_cast<const char*>(bytes.data() + 16), manifest_len));

    Bundle bundle;
    bundle.created_at = manifest.at("created_at").get<std::string>();
    bundle.config_digest = manifest.at("config_digest").get<std::string>();
    if (manifest.contains("extra"))
        bundle.extra = manifest.at("extra").get<std::map<std::string, std::string>>();
    const std::size_t payload_start = 16 + manifest_len;
    for (const auto& c : manifest.at("components")) {
        BundleComponent comp;
        comp.name = c.at("name").get<std::string>();
        const std::uint64_t offset = c.at("offset").get<std::uint64_t>();
        const std::uint64_t length = c.at("length").get<std::uint64_t>();
        if (payload_start + offset + length > bytes.size())
            throw BundleFormatError("component '" + comp.name + "' exceeds file size");
        comp.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(payload_start + offset),
                            bytes.begin() +
                                static_cast<std::ptrdiff_t>(payload_start + offset + length));
        if (crc32(comp.payload) != c.at("crc32").get<std::uint32_t>())
            throw BundleFormatError("checksum mismatch in component '" + comp.name + "'");
        bundle.components.push_back(std::move(comp));
    }
    return bundle;
}

}  // namespace reliance::cli
