#include <algorithm>
#include <cmath>
#include <map>

#include "sprobe/error.hpp"
#include "sprobe/pipeline.hpp"
#include "sprobe/store.hpp"

namespace sprobe::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path build_manifest_path(const fs::path& out) { return out.parent_path() / "manifest.json"; }

json to_json(const BuildConfig& c) {
    return {{"quality", to_json(c.quality)},
            {"match_tolerance_hours", c.match_tolerance_hours},
            {"variable", c.variable},
            {"crop_size", kCropSize}};
}

namespace {

struct FrameFile {
    UnixSeconds timestamp = 0;
    fs::path path;
};

std::vector<FrameFile> index_grids(const fs::path& dir, const std::string& variable) {
    if (!fs::is_directory(dir)) throw IoError(dir.string(), "grid directory does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && !e.path().filename().string().starts_with(".")) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<FrameFile> frames;
    for (const auto& f : files) frames.push_back({read_grid_timestamp(f, variable), f});
    std::stable_sort(frames.begin(), frames.end(),
                     [](const FrameFile& a, const FrameFile& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (frames[i].timestamp == frames[i - 1].timestamp)
            throw FormatError("grid files " + frames[i - 1].path.filename().string() + " and " +
                              frames[i].path.filename().string() + " share timestamp " +
                              format_iso8601(frames[i].timestamp));
    return frames;
}

// Nearest frame within the tolerance; ties go to the earlier frame.
std::optional<std::size_t> match_frame(const std::vector<FrameFile>& frames, UnixSeconds t, UnixSeconds tol) {
    auto it = std::lower_bound(frames.begin(), frames.end(), t,
                               [](const FrameFile& f, UnixSeconds v) { return f.timestamp < v; });
    std::optional<std::size_t> best;
    UnixSeconds best_gap = 0;
    auto consider = [&](std::size_t k) {
        const UnixSeconds gap = std::abs(frames[k].timestamp - t);
        if (gap <= tol && (!best || gap < best_gap)) {
            best = k;
            best_gap = gap;
        }
    };
    const auto k = static_cast<std::size_t>(it - frames.begin());
    if (k > 0) consider(k - 1);
    if (k < frames.size()) consider(k);
    return best;
}

}  // namespace

BuildResult build_dataset(const fs::path& tracks, const fs::path& grids_dir, const fs::path& out,
                          const BuildConfig& config) {
    if (!(config.match_tolerance_hours >= 0.0)) throw ValidationError("build: match tolerance must be non-negative");
    if (!(config.quality.max_invalid_fraction >= 0.0 && config.quality.max_invalid_fraction <= 1.0))
        throw ValidationError("build: invalid fraction limit must lie in [0, 1]");
    if (out.filename().empty()) throw ValidationError("build: output path needs a file name");

    std::map<std::string, std::vector<RawTrackRow>> by_storm;
    for (auto& r : read_tracks_csv(tracks)) by_storm[r.storm_id].push_back(std::move(r));

    BuildResult res;
    std::vector<StormRecord> targets;
    std::map<std::string, std::size_t> storms_per_agency;
    for (auto& [id, rows] : by_storm) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const RawTrackRow& a, const RawTrackRow& b) { return a.timestamp < b.timestamp; });
        auto cleaned = clean_track(rows);
        if (!cleaned.track) {
            ++res.storm_drop_reasons[cleaned.drop_reason];
            continue;
        }
        ++storms_per_agency[rows.front().agency];
        for (auto& rec : cleaned.track->records) targets.push_back(std::move(rec));
    }
    res.timesteps = targets.size();

    const auto frames = index_grids(grids_dir, config.variable);
    const auto tol = static_cast<UnixSeconds>(std::llround(config.match_tolerance_hours * 3600.0));
    std::map<std::size_t, std::vector<std::size_t>> per_frame;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (auto k = match_frame(frames, targets[i].timestamp, tol))
            per_frame[*k].push_back(i);
        else
            ++res.drop_reasons["no_grid"];
    }

    // Each frame is loaded once; crops land in their target slot so output order
    // stays (storm_id, timestamp) whatever the processing order.
    std::vector<std::optional<CropFrame>> crops(targets.size());
    std::size_t filled_pixels = 0;
    for (const auto& [k, members] : per_frame) {
        const GridFrame g = read_grid(frames[k].path, config.variable);
        for (std::size_t i : members) {
            auto w = extract_crop(g, targets[i].lat, targets[i].lon);
            if (!w.discard_reason.empty()) {
                ++res.drop_reasons[w.discard_reason];
                continue;
            }
            auto c = quality_check(std::move(w.values), config.quality);
            if (c.status == CropStatus::Discarded) {
                ++res.drop_reasons[c.reason];
                continue;
            }
            c.storm_id = targets[i].storm_id;
            c.timestamp = targets[i].timestamp;
            c.center_lat = targets[i].lat;
            c.center_lon = targets[i].lon;
            filled_pixels += c.fill_count;
            crops[i] = std::move(c);
        }
    }

    ImageStore store;
    std::map<std::string, std::size_t> kept_per_agency;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!crops[i]) continue;
        store.pixels.insert(store.pixels.end(), crops[i]->values.begin(), crops[i]->values.end());
        store.meta.push_back(targets[i]);
        ++kept_per_agency[targets[i].agency];
    }
    res.kept = store.frames();
    write_image_store(store, out);

    json grids = json::array();
    for (const auto& f : frames)
        grids.push_back({{"file", f.path.filename().string()},
                         {"timestamp", format_iso8601(f.timestamp)},
                         {"digest", file_digest(f.path)}});
    json agencies = json::object();
    for (const auto& [a, n] : storms_per_agency)
        agencies[a] = {{"storms", n}, {"kept_frames", kept_per_agency.count(a) ? kept_per_agency.at(a) : 0}};
    std::size_t dropped = 0;
    for (const auto& [_, n] : res.drop_reasons) dropped += n;

    res.manifest = {
        {"kind", "sprobe-build"},
        {"version", 1},
        {"inputs", {{"tracks", {{"file", tracks.filename().string()}, {"digest", file_digest(tracks)}}}, {"grids", grids}}},
        {"config", to_json(config)},
        {"counts",
         {{"storms_raw", by_storm.size()},
          {"storms_clean", by_storm.size() - [&] {
               std::size_t n = 0;
               for (const auto& [_, c] : res.storm_drop_reasons) n += c;
               return n;
           }()},
          {"timesteps", res.timesteps},
          {"kept", res.kept},
          {"dropped", dropped},
          {"filled_pixels", filled_pixels}}},
        {"per_agency", agencies},
        {"drop_reasons", res.drop_reasons},
        {"storm_drop_reasons", res.storm_drop_reasons},
        {"output",
         {{"image_store", out.filename().string()},
          {"metadata", meta_path(out).filename().string()},
          {"digest", store_digest(out)}}}};
    atomic_write(build_manifest_path(out), res.manifest.dump(2) + "\n");
    return res;
}

}  // namespace sprobe::pipeline
