#include "sprobe/store.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "sprobe/error.hpp"

namespace sprobe {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

static_assert(std::endian::native == std::endian::little, "store I/O assumes a little-endian host");

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

class Cursor {
public:
    Cursor(std::string_view bytes, std::string origin) : bytes_(bytes), origin_(std::move(origin)) {}

    template <class T>
    T get() {
        need(sizeof(T), "header");
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::string_view take(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }
    const std::string& origin() const { return origin_; }

private:
    void need(std::size_t n, const char* what) {
        if (bytes_.size() - pos_ < n)
            throw FormatError(origin_ + ": truncated " + what + " (need " + std::to_string(n) + " bytes, have " +
                              std::to_string(bytes_.size() - pos_) + ")");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
    std::string origin_;
};

void expect_magic(Cursor& c, std::string_view magic) {
    auto m = c.take(4, "magic");
    if (m != magic) throw FormatError(c.origin() + ": bad magic (expected " + std::string(magic) + ")");
    auto version = c.get<std::uint32_t>();
    if (version != kFormatVersion)
        throw FormatError(c.origin() + ": unsupported format version " + std::to_string(version));
}

void expect_dtype_and_pad(Cursor& c) {
    auto dtype = c.get<std::uint8_t>();
    if (dtype != kDtypeF32) throw FormatError(c.origin() + ": unsupported dtype code " + std::to_string(dtype));
    auto pad = c.take(3, "header padding");
    if (pad != std::string_view("\0\0\0", 3)) throw FormatError(c.origin() + ": non-zero header padding");
}

double parse_double_field(std::string_view s, const std::string& where) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw FormatError(where + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

template <class Int>
Int parse_int_field(std::string_view s, const std::string& where) {
    Int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw FormatError(where + ": cannot parse integer '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

void check_text_field(const std::string& s, const char* name) {
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw ValidationError(std::string(name) + " '" + s + "' contains a separator character");
}

}  // namespace

fs::path meta_path(const fs::path& store) { return fs::path(store.string() + ".meta.csv"); }
fs::path store_manifest_path(const fs::path& store) { return fs::path(store.string() + ".manifest.json"); }

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string format_meta_csv(const std::vector<StormRecord>& rows) {
    std::string out(kMetaHeader);
    out += '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        check_text_field(r.storm_id, "storm_id");
        check_text_field(r.agency, "agency");
        out += std::to_string(i);
        out += ',';
        out += r.storm_id;
        out += ',';
        out += r.agency;
        out += ',';
        out += std::to_string(r.timestamp);
        for (double v : {r.lat, r.lon, r.pressure_hpa, r.wind_kt}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<StormRecord> parse_meta_csv(std::string_view text, const std::string& origin) {
    std::vector<StormRecord> rows;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) throw FormatError(origin + ": missing final newline");
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') throw FormatError(origin + ": CRLF line endings are not allowed");
        if (line_no == 1) {
            if (line != kMetaHeader) throw FormatError(origin + ": unexpected header '" + std::string(line) + "'");
            continue;
        }
        const std::string where = origin + ":" + std::to_string(line_no);
        auto f = split_fields(line);
        if (f.size() != 8) throw FormatError(where + ": expected 8 fields, got " + std::to_string(f.size()));
        if (parse_int_field<std::size_t>(f[0], where) != rows.size())
            throw FormatError(where + ": row index out of sequence");
        StormRecord r;
        r.storm_id = std::string(f[1]);
        r.agency = std::string(f[2]);
        r.timestamp = parse_int_field<std::int64_t>(f[3], where);
        r.lat = parse_double_field(f[4], where);
        r.lon = parse_double_field(f[5], where);
        r.pressure_hpa = parse_double_field(f[6], where);
        r.wind_kt = parse_double_field(f[7], where);
        rows.push_back(std::move(r));
    }
    if (line_no == 0) throw FormatError(origin + ": empty metadata sidecar");
    return rows;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string(), "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(path.string(), "read failed");
    return ss.str();
}

void atomic_write(const fs::path& path, std::string_view bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(tmp.string(), "cannot open for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw IoError(tmp.string(), "write failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError(path.string(), "rename failed: " + ec.message());
}

std::string sha256_digest(std::span<const unsigned char> bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out = "sha256:";
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

std::string file_digest(const fs::path& path) {
    auto bytes = read_file(path);
    return sha256_digest({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
}

std::string store_digest(const fs::path& path) {
    auto bytes = read_file(path);
    bytes += read_file(meta_path(path));
    return sha256_digest({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
}

void write_feature_store(const FeatureStore& store, const fs::path& path) {
    validate(store);
    const std::size_t n = store.rows();
    const std::size_t d = store.dim();
    if (d > UINT32_MAX) throw ValidationError("feature dimension exceeds u32");
    std::string out;
    out.reserve(kFeatureHeaderBytes + n * d * sizeof(float));
    out += "TCFS";
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint64_t>(out, n);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    put<std::uint8_t>(out, kDtypeF32);
    out.append(3, '\0');
    out.append(reinterpret_cast<const char*>(store.features.data()), n * d * sizeof(float));

    nlohmann::json manifest = {{"format", "TCFS"},
                               {"rows", n},
                               {"dim", d},
                               {"aggregation", std::string(to_string(store.aggregation))}};
    atomic_write(path, out);
    atomic_write(meta_path(path), format_meta_csv(store.meta));
    atomic_write(store_manifest_path(path), manifest.dump(2) + "\n");
}

FeatureStore read_feature_store(const fs::path& path) {
    const std::string bytes = read_file(path);
    Cursor c(bytes, path.string());
    expect_magic(c, "TCFS");
    const auto n = c.get<std::uint64_t>();
    const auto d = c.get<std::uint32_t>();
    expect_dtype_and_pad(c);
    if (d != 0 && n > c.remaining() / (std::size_t{d} * sizeof(float)))
        throw FormatError(path.string() + ": truncated payload (header claims " + std::to_string(n) + " rows of " +
                          std::to_string(d) + " values)");
    const std::size_t payload = n * d * sizeof(float);
    if (c.remaining() != payload)
        throw FormatError(path.string() + ": payload is " + std::to_string(c.remaining()) + " bytes, expected " +
                          std::to_string(payload));

    FeatureStore store;
    store.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    auto raw = c.take(payload, "payload");
    if (payload) std::memcpy(store.features.data(), raw.data(), payload);

    const fs::path mp = meta_path(path);
    const std::string meta_bytes = read_file(mp);
    store.meta = parse_meta_csv(meta_bytes, mp.string());
    if (store.meta.size() != n)
        throw FormatError(mp.string() + ": metadata has " + std::to_string(store.meta.size()) +
                          " rows but feature store has " + std::to_string(n));

    const fs::path man = store_manifest_path(path);
    if (fs::exists(man)) {
        auto j = nlohmann::json::parse(read_file(man), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw FormatError(man.string() + ": not a JSON object");
        if (j.contains("aggregation")) store.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
    }

    validate(store);
    std::string all = bytes + meta_bytes;
    store.digest = sha256_digest({reinterpret_cast<const unsigned char*>(all.data()), all.size()});
    return store;
}

void write_image_store(const ImageStore& store, const fs::path& path) {
    const std::size_t n = store.frames();
    const std::size_t frame = kCropSize * kCropSize;
    if (store.pixels.size() != n * frame)
        throw ValidationError("image store has " + std::to_string(store.pixels.size()) + " pixels for " +
                              std::to_string(n) + " frames");
    std::string out;
    out.reserve(kImageHeaderBytes + store.pixels.size() * sizeof(float));
    out += "TCIM";
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint64_t>(out, n);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(kCropSize));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(kCropSize));
    put<std::uint8_t>(out, kDtypeF32);
    out.append(3, '\0');
    out.append(reinterpret_cast<const char*>(store.pixels.data()), store.pixels.size() * sizeof(float));
    atomic_write(path, out);
    atomic_write(meta_path(path), format_meta_csv(store.meta));
}

ImageStore read_image_store(const fs::path& path) {
    const std::string bytes = read_file(path);
    Cursor c(bytes, path.string());
    expect_magic(c, "TCIM");
    const auto n = c.get<std::uint64_t>();
    const auto h = c.get<std::uint32_t>();
    const auto w = c.get<std::uint32_t>();
    if (h != kCropSize || w != kCropSize)
        throw FormatError(path.string() + ": frame size " + std::to_string(h) + "x" + std::to_string(w) +
                          " is not 224x224");
    expect_dtype_and_pad(c);
    const std::size_t frame_bytes = kCropSize * kCropSize * sizeof(float);
    if (n > c.remaining() / frame_bytes || c.remaining() != n * frame_bytes)
        throw FormatError(path.string() + ": truncated payload for " + std::to_string(n) + " frames");
    ImageStore store;
    store.pixels.resize(n * kCropSize * kCropSize);
    auto raw = c.take(n * frame_bytes, "payload");
    if (!raw.empty()) std::memcpy(store.pixels.data(), raw.data(), raw.size());
    const fs::path mp = meta_path(path);
    store.meta = parse_meta_csv(read_file(mp), mp.string());
    if (store.meta.size() != n)
        throw FormatError(mp.string() + ": metadata has " + std::to_string(store.meta.size()) +
                          " rows but image store has " + std::to_string(n));
    return store;
}

}  // namespace sprobe
