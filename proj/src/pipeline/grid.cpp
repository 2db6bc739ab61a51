#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "sprobe/error.hpp"
#include "sprobe/pipeline.hpp"
#include "sprobe/store.hpp"

#ifdef SPROBE_HAVE_HDF5
#include <hdf5.h>
#endif

namespace sprobe::pipeline {

namespace {

constexpr std::uint32_t kGridVersion = 1;
constexpr char kHdf5Signature[] = "\x89HDF\r\n\x1a\n";

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T get(std::string_view bytes, std::size_t offset) {
    T v;
    std::memcpy(&v, bytes.data() + offset, sizeof(T));
    return v;
}

void check_uniform(const std::vector<double>& axis, const char* name) {
    if (axis.size() < 2) throw ValidationError(std::string("grid: ") + name + " axis needs at least 2 points");
    const double step = axis[1] - axis[0];
    if (!(step != 0.0) || !std::isfinite(step)) throw ValidationError(std::string("grid: degenerate ") + name + " axis");
    for (std::size_t k = 0; k < axis.size(); ++k)
        if (!(std::abs(axis[k] - (axis[0] + static_cast<double>(k) * step)) <= 1e-9))
            throw ValidationError(std::string("grid: ") + name + " axis is not uniform at index " + std::to_string(k));
}

// Float32-stored axes are only uniform to single precision; rebuild them in double.
std::vector<double> regularize(const std::vector<double>& axis, const std::string& origin, const char* name) {
    if (axis.size() < 2) throw FormatError(origin + ": " + name + " axis needs at least 2 points");
    const double step = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
    std::vector<double> out(axis.size());
    for (std::size_t k = 0; k < axis.size(); ++k) {
        out[k] = axis.front() + static_cast<double>(k) * step;
        if (!(std::abs(out[k] - axis[k]) <= 1e-4))
            throw FormatError(origin + ": " + name + " axis is not uniform at index " + std::to_string(k));
    }
    return out;
}

std::string read_prefix(const std::filesystem::path& path, std::size_t n) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string(), "cannot open grid file");
    std::string buf(n, '\0');
    in.read(buf.data(), static_cast<std::streamsize>(n));
    buf.resize(static_cast<std::size_t>(in.gcount()));
    return buf;
}

}  // namespace

std::vector<double> uniform_axis(double first, double step, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = first + static_cast<double>(k) * step;
    return out;
}

void validate(const GridFrame& g) {
    check_uniform(g.lat, "lat");
    check_uniform(g.lon, "lon");
    if (!(g.lon[1] > g.lon[0])) throw ValidationError("grid: longitude axis must be ascending");
    if (std::min(g.lat.front(), g.lat.back()) < -90.0 || std::max(g.lat.front(), g.lat.back()) > 90.0)
        throw ValidationError("grid: latitudes outside [-90, 90]");
    if (g.values.size() != g.nlat() * g.nlon())
        throw ValidationError("grid: payload has " + std::to_string(g.values.size()) + " values for " +
                              std::to_string(g.nlat()) + "x" + std::to_string(g.nlon()) + " axes");
}

std::string encode_raw_grid(const GridFrame& g) {
    validate(g);
    std::string out;
    out.reserve(kGridHeaderBytes + 8 * (g.nlat() + g.nlon()) + 4 * g.values.size());
    out += "TCGR";
    put<std::uint32_t>(out, kGridVersion);
    put<std::int64_t>(out, g.timestamp);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nlat()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nlon()));
    put<std::uint8_t>(out, 0);
    out.append(3, '\0');
    out.append(reinterpret_cast<const char*>(g.lat.data()), g.lat.size() * sizeof(double));
    out.append(reinterpret_cast<const char*>(g.lon.data()), g.lon.size() * sizeof(double));
    out.append(reinterpret_cast<const char*>(g.values.data()), g.values.size() * sizeof(float));
    return out;
}

GridFrame decode_raw_grid(std::string_view bytes, const std::string& origin) {
    if (bytes.size() < kGridHeaderBytes) throw FormatError(origin + ": truncated grid header");
    if (bytes.substr(0, 4) != "TCGR") throw FormatError(origin + ": bad magic (expected TCGR)");
    if (get<std::uint32_t>(bytes, 4) != kGridVersion)
        throw FormatError(origin + ": unsupported grid version " + std::to_string(get<std::uint32_t>(bytes, 4)));
    GridFrame g;
    g.timestamp = get<std::int64_t>(bytes, 8);
    const std::uint64_t nlat = get<std::uint32_t>(bytes, 16);
    const std::uint64_t nlon = get<std::uint32_t>(bytes, 20);
    if (get<std::uint8_t>(bytes, 24) != 0) throw FormatError(origin + ": unsupported dtype");
    if (bytes[25] != 0 || bytes[26] != 0 || bytes[27] != 0) throw FormatError(origin + ": non-zero header padding");
    const std::uint64_t expect = kGridHeaderBytes + 8 * (nlat + nlon) + 4 * nlat * nlon;
    if (bytes.size() != expect)
        throw FormatError(origin + ": payload is " + std::to_string(bytes.size()) + " bytes, axes declare " +
                          std::to_string(expect));
    g.lat.resize(nlat);
    g.lon.resize(nlon);
    g.values.resize(nlat * nlon);
    std::size_t off = kGridHeaderBytes;
    std::memcpy(g.lat.data(), bytes.data() + off, 8 * nlat);
    off += 8 * nlat;
    std::memcpy(g.lon.data(), bytes.data() + off, 8 * nlon);
    off += 8 * nlon;
    std::memcpy(g.values.data(), bytes.data() + off, 4 * nlat * nlon);
    try {
        validate(g);
    } catch (const ValidationError& e) {
        throw FormatError(origin + ": " + e.what());
    }
    return g;
}

void write_raw_grid(const GridFrame& g, const std::filesystem::path& path) { atomic_write(path, encode_raw_grid(g)); }

#ifdef SPROBE_HAVE_HDF5

namespace {

struct H5Handle {
    hid_t id = -1;
    herr_t (*close)(hid_t) = nullptr;
    H5Handle(hid_t i, herr_t (*c)(hid_t)) : id(i), close(c) {}
    H5Handle(const H5Handle&) = delete;
    H5Handle& operator=(const H5Handle&) = delete;
    ~H5Handle() {
        if (id >= 0) close(id);
    }
};

struct NcFile {
    H5Handle file;
    std::string origin;

    explicit NcFile(const std::filesystem::path& path)
        : file((H5Eset_auto2(H5E_DEFAULT, nullptr, nullptr), H5Fopen(path.c_str(), H5F_ACC_RDONLY, H5P_DEFAULT)),
               H5Fclose),
          origin(path.string()) {
        if (file.id < 0) throw FormatError(origin + ": not a readable NetCDF4/HDF5 file");
    }

    hid_t open(const std::string& name, H5Handle& holder) const {
        if (H5Lexists(file.id, name.c_str(), H5P_DEFAULT) <= 0)
            throw FormatError(origin + ": missing variable '" + name + "'");
        holder.id = H5Dopen2(file.id, name.c_str(), H5P_DEFAULT);
        if (holder.id < 0) throw FormatError(origin + ": cannot open variable '" + name + "'");
        return holder.id;
    }

    std::vector<hsize_t> dims(hid_t ds) const {
        H5Handle space(H5Dget_space(ds), H5Sclose);
        const int rank = H5Sget_simple_extent_ndims(space.id);
        if (rank < 0) throw FormatError(origin + ": bad dataspace");
        std::vector<hsize_t> d(static_cast<std::size_t>(rank));
        H5Sget_simple_extent_dims(space.id, d.data(), nullptr);
        return d;
    }

    std::vector<double> read_doubles(const std::string& name) const {
        H5Handle ds(-1, H5Dclose);
        open(name, ds);
        std::size_t n = 1;
        for (auto d : dims(ds.id)) n *= d;
        std::vector<double> out(n);
        if (n && H5Dread(ds.id, H5T_NATIVE_DOUBLE, H5S_ALL, H5S_ALL, H5P_DEFAULT, out.data()) < 0)
            throw FormatError(origin + ": cannot read variable '" + name + "'");
        return out;
    }

    std::optional<double> attr_double(hid_t obj, const char* name) const {
        if (H5Aexists(obj, name) <= 0) return std::nullopt;
        H5Handle a(H5Aopen(obj, name, H5P_DEFAULT), H5Aclose);
        double v = 0.0;
        if (a.id < 0 || H5Aread(a.id, H5T_NATIVE_DOUBLE, &v) < 0)
            throw FormatError(origin + ": cannot read attribute '" + name + "'");
        return v;
    }

    std::optional<std::string> attr_string(hid_t obj, const char* name) const {
        if (H5Aexists(obj, name) <= 0) return std::nullopt;
        H5Handle a(H5Aopen(obj, name, H5P_DEFAULT), H5Aclose);
        H5Handle type(H5Aget_type(a.id), H5Tclose);
        if (H5Tget_class(type.id) != H5T_STRING) throw FormatError(origin + ": attribute '" + name + "' is not text");
        if (H5Tis_variable_str(type.id) > 0) {
            H5Handle mem(H5Tcopy(H5T_C_S1), H5Tclose);
            H5Tset_size(mem.id, H5T_VARIABLE);
            H5Tset_cset(mem.id, H5Tget_cset(type.id));
            char* s = nullptr;
            if (H5Aread(a.id, mem.id, &s) < 0) throw FormatError(origin + ": cannot read attribute '" + name + "'");
            std::string out = s ? s : "";
            H5free_memory(s);
            return out;
        }
        const std::size_t n = H5Tget_size(type.id);
        std::string out(n, '\0');
        H5Handle mem(H5Tcopy(H5T_C_S1), H5Tclose);
        H5Tset_size(mem.id, n);
        H5Tset_cset(mem.id, H5Tget_cset(type.id));
        if (H5Aread(a.id, mem.id, out.data()) < 0) throw FormatError(origin + ": cannot read attribute '" + name + "'");
        out.resize(std::strlen(out.c_str()));
        return out;
    }

    UnixSeconds timestamp() const {
        const auto t = read_doubles("time");
        if (t.size() != 1) throw FormatError(origin + ": expected exactly one time step, found " + std::to_string(t.size()));
        H5Handle ds(-1, H5Dclose);
        open("time", ds);
        const std::string units = attr_string(ds.id, "units").value_or("seconds since 1970-01-01");
        const auto since = units.find(" since ");
        if (since == std::string::npos) throw FormatError(origin + ": unsupported time units '" + units + "'");
        const std::string unit = units.substr(0, since);
        double scale = 0.0;
        if (unit == "seconds" || unit == "second" || unit == "s") scale = 1.0;
        else if (unit == "minutes" || unit == "minute") scale = 60.0;
        else if (unit == "hours" || unit == "hour" || unit == "h") scale = 3600.0;
        else if (unit == "days" || unit == "day") scale = 86400.0;
        else throw FormatError(origin + ": unsupported time unit '" + unit + "'");
        std::string epoch = units.substr(since + 7);
        for (const char* suffix : {" UTC", " utc", "Z"})
            if (epoch.size() > std::strlen(suffix) && epoch.ends_with(suffix)) epoch.resize(epoch.size() - std::strlen(suffix));
        if (epoch.size() == 10) epoch += "T00:00";
        const UnixSeconds base = parse_iso8601(epoch);
        return base + static_cast<UnixSeconds>(std::llround(t[0] * scale));
    }
};

}  // namespace

bool netcdf_supported() { return true; }

GridFrame read_netcdf_grid(const std::filesystem::path& path, const std::string& variable) {
    NcFile nc(path);
    GridFrame g;
    g.timestamp = nc.timestamp();
    g.lat = regularize(nc.read_doubles("lat"), nc.origin, "lat");
    g.lon = regularize(nc.read_doubles("lon"), nc.origin, "lon");

    H5Handle ds(-1, H5Dclose);
    nc.open(variable, ds);
    const auto d = nc.dims(ds.id);
    const bool shape_ok = (d.size() == 3 && d[0] == 1 && d[1] == g.nlat() && d[2] == g.nlon()) ||
                          (d.size() == 2 && d[0] == g.nlat() && d[1] == g.nlon());
    if (!shape_ok) throw FormatError(nc.origin + ": variable '" + variable + "' does not match (time, lat, lon)");
    std::vector<double> raw(g.nlat() * g.nlon());
    if (H5Dread(ds.id, H5T_NATIVE_DOUBLE, H5S_ALL, H5S_ALL, H5P_DEFAULT, raw.data()) < 0)
        throw FormatError(nc.origin + ": cannot read variable '" + variable + "'");
    const double scale = nc.attr_double(ds.id, "scale_factor").value_or(1.0);
    const double offset = nc.attr_double(ds.id, "add_offset").value_or(0.0);
    const auto fill = nc.attr_double(ds.id, "_FillValue");
    g.values.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const bool missing = (fill && raw[i] == *fill) || std::isnan(raw[i]);
        g.values[i] = missing ? std::numeric_limits<float>::quiet_NaN() : static_cast<float>(raw[i] * scale + offset);
    }
    try {
        validate(g);
    } catch (const ValidationError& e) {
        throw FormatError(nc.origin + ": " + e.what());
    }
    return g;
}

#else

bool netcdf_supported() { return false; }

GridFrame read_netcdf_grid(const std::filesystem::path& path, const std::string&) {
    throw FormatError(path.string() + ": NetCDF support was not compiled in (HDF5 not found)");
}

#endif

GridFrame read_grid(const std::filesystem::path& path, const std::string& variable) {
    const std::string head = read_prefix(path, 8);
    if (head.starts_with("TCGR")) return decode_raw_grid(read_file(path), path.string());
    if (head == std::string_view(kHdf5Signature, 8)) return read_netcdf_grid(path, variable);
    throw FormatError(path.string() + ": unrecognized grid file (expected TCGR or NetCDF4)");
}

UnixSeconds read_grid_timestamp(const std::filesystem::path& path, const std::string& variable) {
    const std::string head = read_prefix(path, kGridHeaderBytes);
    if (head.starts_with("TCGR")) {
        if (head.size() < kGridHeaderBytes) throw FormatError(path.string() + ": truncated grid header");
        return get<std::int64_t>(head, 8);
    }
    if (head.size() >= 8 && head.substr(0, 8) == std::string_view(kHdf5Signature, 8)) {
#ifdef SPROBE_HAVE_HDF5
        return NcFile(path).timestamp();
#else
        return read_netcdf_grid(path, variable).timestamp;
#endif
    }
    (void)variable;
    throw FormatError(path.string() + ": unrecognized grid file (expected TCGR or NetCDF4)");
}

}  // namespace sprobe::pipeline
