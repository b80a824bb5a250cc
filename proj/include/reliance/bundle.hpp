#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace reliance::cli {

// Byte-oriented encoders for the bundle payloads. All multi-byte values are
// little-endian; floats are IEEE-754 binary64.
class BlobWriter {
  public:
    void put_u8(std::uint8_t v) { bytes_.push_back(v); }
    void put_u32(std::uint32_t v);
    void put_u64(std::uint64_t v);
    void put_i64(std::int64_t v) { put_u64(static_cast<std::uint64_t>(v)); }
    void put_f64(double v);
    void put_string(const std::string& s);  // u32 length + bytes
    void put_f64_array(std::span<const double> values);  // u64 count + values
    void put_i64_array(std::span<const std::int64_t> values);

    std::vector<std::uint8_t> take() { return std::move(bytes_); }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  private:
    std::vector<std::uint8_t> bytes_;
};

class BlobReader {
  public:
    explicit BlobReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t get_u8();
    std::uint32_t get_u32();
    std::uint64_t get_u64();
    std::int64_t get_i64() { return static_cast<std::int64_t>(get_u64()); }
    double get_f64();
    std::string get_string();
    std::vector<double> get_f64_array();
    std::vector<std::int64_t> get_i64_array();
    bool at_end() const { return pos_ == bytes_.size(); }

  private:
    void need(std::size_t n);
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

struct BundleComponent {
    std::string name;
    std::vector<std::uint8_t> payload;
};

// On disk: magic "RLNC", u32 format version, u64 manifest length, manifest
// (canonical JSON: created_at, config digest, component offsets + CRCs),
// then the payload blobs back to back.
struct Bundle {
    static constexpr std::uint32_t kFormatVersion = 1;

    std::string created_at;
    std::string config_digest;
    std::map<std::string, std::string> extra;  // free-form manifest entries
    std::vector<BundleComponent> components;

    const BundleComponent* find(const std::string& name) const;
    const BundleComponent& require(const std::string& name) const;

    void save(const std::string& path) const;
    // Verifies magic, version and every component checksum.
    static Bundle load(const std::string& path);
};

}  // namespace reliance::cli
