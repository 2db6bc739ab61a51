#include <algorithm>
#include <charconv>
#include <cmath>

#include "sprobe/error.hpp"
#include "sprobe/pipeline.hpp"
#include "sprobe/store.hpp"

namespace sprobe::pipeline {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(std::string_view s, const std::string& where) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw FormatError(where + ": '" + std::string(s) + "' is not a finite number");
    return v;
}

std::optional<double> parse_optional(std::string_view s, const std::string& where) {
    if (s.empty()) return std::nullopt;
    return parse_number(s, where);
}

UnixSeconds floor_div(UnixSeconds a, UnixSeconds b) {
    UnixSeconds q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

struct Series {
    std::vector<UnixSeconds> t;
    std::vector<double> v;
};

// Exact at knots, linear in between; t must lie within [t.front(), t.back()].
double interpolate(const Series& s, UnixSeconds t, std::size_t* knot = nullptr) {
    auto it = std::lower_bound(s.t.begin(), s.t.end(), t);
    const auto k = static_cast<std::size_t>(it - s.t.begin());
    if (it != s.t.end() && *it == t) {
        if (knot) *knot = k;
        return s.v[k];
    }
    if (knot) *knot = SIZE_MAX;
    const UnixSeconds t0 = s.t[k - 1], t1 = s.t[k];
    const double v0 = s.v[k - 1], v1 = s.v[k];
    return v0 + (v1 - v0) * (static_cast<double>(t - t0) / static_cast<double>(t1 - t0));
}

CleanResult dropped(std::string reason) {
    CleanResult r;
    r.drop_reason = std::move(reason);
    return r;
}

}  // namespace

std::vector<RawTrackRow> parse_tracks_csv(std::string_view text, const std::string& origin) {
    std::vector<RawTrackRow> rows;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            if (line != kTracksHeader)
                throw FormatError(origin + ":1: expected header '" + std::string(kTracksHeader) + "'");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        const auto f = split(line);
        if (f.size() != 7)
            throw FormatError(where + ": expected 7 fields, found " + std::to_string(f.size()));
        RawTrackRow r;
        r.storm_id = std::string(f[0]);
        r.agency = std::string(f[1]);
        if (r.storm_id.empty()) throw FormatError(where + ": empty storm_id");
        try {
            r.timestamp = parse_iso8601(f[2]);
        } catch (const FormatError& e) {
            throw FormatError(where + ": " + e.what());
        }
        r.lat = parse_number(f[3], where);
        r.lon = parse_number(f[4], where);
        if (r.lat < -90.0 || r.lat > 90.0) throw FormatError(where + ": latitude out of [-90, 90]");
        r.pressure_hpa = parse_optional(f[5], where);
        r.wind_kt = parse_optional(f[6], where);
        rows.push_back(std::move(r));
    }
    if (!header_seen) throw FormatError(origin + ": empty tracks file");
    return rows;
}

std::vector<RawTrackRow> read_tracks_csv(const std::filesystem::path& path) {
    return parse_tracks_csv(read_file(path), path.string());
}

std::string format_tracks_csv(const std::vector<RawTrackRow>& rows) {
    std::string out(kTracksHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += r.storm_id + ',' + r.agency + ',' + format_iso8601(r.timestamp) + ',' + format_double(r.lat) + ',' +
               format_double(r.lon) + ',';
        if (r.pressure_hpa) out += format_double(*r.pressure_hpa);
        out += ',';
        if (r.wind_kt) out += format_double(*r.wind_kt);
        out += '\n';
    }
    return out;
}

std::vector<RawTrackRow> to_raw(const Trajectory& t) {
    std::vector<RawTrackRow> out;
    for (const auto& r : t.records)
        out.push_back({r.storm_id, r.agency, r.timestamp, r.lat, r.lon, r.pressure_hpa, r.wind_kt});
    return out;
}

std::string format_tracks_csv(const std::vector<Trajectory>& storms) {
    std::vector<RawTrackRow> rows;
    for (const auto& t : storms)
        for (auto& r : to_raw(t)) rows.push_back(std::move(r));
    return format_tracks_csv(rows);
}

CleanResult clean_track(const std::vector<RawTrackRow>& rows) {
    if (rows.empty()) return dropped("empty");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].storm_id != rows[0].storm_id)
            throw ValidationError("clean_track: rows mix storms " + rows[0].storm_id + " and " + rows[i].storm_id);
        if (rows[i].timestamp < rows[i - 1].timestamp)
            throw ValidationError("clean_track: rows of " + rows[0].storm_id + " are not sorted by time");
        if (rows[i].timestamp == rows[i - 1].timestamp) return dropped("duplicate_timestamp");
        if (rows[i].agency != rows[0].agency) return dropped("mixed_agency");
    }

    std::size_t first = SIZE_MAX, last = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].pressure_hpa && rows[i].wind_kt) {
            first = std::min(first, i);
            last = i;
        }
    }
    if (first == SIZE_MAX) return dropped("no_valid_intensity");

    const UnixSeconds g0 = -floor_div(-rows[first].timestamp, kThreeHours) * kThreeHours;
    const UnixSeconds g1 = floor_div(rows[last].timestamp, kThreeHours) * kThreeHours;
    if (g1 <= g0) return dropped("too_few_valid");

    Series p, w, lat, lon;
    double unwrapped = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        const auto& r = rows[i];
        if (r.pressure_hpa) p.t.push_back(r.timestamp), p.v.push_back(*r.pressure_hpa);
        if (r.wind_kt) w.t.push_back(r.timestamp), w.v.push_back(*r.wind_kt);
        lat.t.push_back(r.timestamp);
        lat.v.push_back(r.lat);
        if (i == first) {
            unwrapped = r.lon;
        } else {
            double step = std::fmod(r.lon - rows[i - 1].lon, 360.0);
            if (step >= 180.0) step -= 360.0;
            if (step < -180.0) step += 360.0;
            unwrapped += step;
        }
        lon.t.push_back(r.timestamp);
        lon.v.push_back(unwrapped);
    }

    Trajectory out;
    out.storm_id = rows[0].storm_id;
    for (UnixSeconds t = g0; t <= g1; t += kThreeHours) {
        StormRecord rec;
        rec.storm_id = out.storm_id;
        rec.agency = rows[0].agency;
        rec.timestamp = t;
        rec.lat = interpolate(lat, t);
        std::size_t knot = SIZE_MAX;
        const double l = interpolate(lon, t, &knot);
        // At a reported time keep the reported longitude rather than its unwrapped image.
        rec.lon = canonical_lon(knot != SIZE_MAX ? rows[first + knot].lon : l);
        rec.pressure_hpa = interpolate(p, t);
        rec.wind_kt = interpolate(w, t);
        try {
            validate(rec);
        } catch (const ValidationError&) {
            return dropped("out_of_range");
        }
        out.records.push_back(std::move(rec));
    }
    validate(out);
    CleanResult res;
    res.track = std::move(out);
    return res;
}

CleanResult clean_track(const Trajectory& t) { return clean_track(to_raw(t)); }

}  // namespace sprobe::pipeline
