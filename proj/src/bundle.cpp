#include "rigidtrack/bundle.hpp"

#include <string>

#include "rigidtrack/binio.hpp"
#include "rigidtrack/error.hpp"
#include "rigidtrack/kvdoc.hpp"

namespace rigidtrack {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "rigidtrack-tracks";

void check_consistent(const TrackBundle& b) {
  if (b.frame_count < 1) {
    fail(ErrorKind::validation, "track bundle has no frames");
  }
  if (b.camera_names.size() != b.camera_sizes.size()) {
    fail(ErrorKind::validation, "camera names and sizes differ in length");
  }
  for (const auto& ob : b.objects) {
    const std::string& id = ob.tracks.object_id;
    size_t n = ob.tracks.track_count();
    size_t cells = n * static_cast<size_t>(b.frame_count);
    if (id.empty() || n == 0 || ob.tracks.frame_count != b.frame_count ||
        ob.tracks.x.size() != cells || ob.tracks.y.size() != cells ||
        ob.tracks.z.size() != cells) {
      fail(ErrorKind::validation,
           "object '" + id + "': malformed 3d track arrays");
    }
    if (ob.views.size() != b.camera_names.size() ||
        ob.occlusion.size() != b.camera_names.size() ||
        ob.eligibility.size() != b.camera_names.size()) {
      fail(ErrorKind::validation,
           "object '" + id + "': per-camera outputs do not cover the bundle cameras");
    }
    for (size_t k = 0; k < ob.views.size(); ++k) {
      const TrackSet2D& v = ob.views[k];
      const OcclusionMap& o = ob.occlusion[k];
      if (to_string(v.camera_id) != b.camera_names[k] ||
          v.frame_count != b.frame_count || v.px.size() != cells ||
          v.py.size() != cells || v.range.size() != cells ||
          v.in_fov.size() != cells || o.occluded.size() != cells ||
          o.fov != v.in_fov) {
        fail(ErrorKind::validation, "object '" + id + "': camera '" +
                                        b.camera_names[k] +
                                        "' arrays are inconsistent");
      }
    }
  }
}

std::string okey(const std::string& id, const std::string& rest) {
  return "object." + id + "." + rest;
}

}  // namespace

const ObjectAnnotation* TrackBundle::object(const std::string& id) const {
  for (const auto& ob : objects) {
    if (ob.tracks.object_id == id) return &ob;
  }
  return nullptr;
}

void write_track_bundle(const fs::path& dir, const TrackBundle& bundle) {
  check_consistent(bundle);
  fs::create_directories(dir / "objects");

  KeyValueDoc doc;
  doc.set("format", kFormat);
  doc.set_int("version", 1);
  doc.set_int("frames", bundle.frame_count);
  doc.set_double("frame_rate", bundle.frame_rate);
  if (!bundle.scene.empty()) doc.set("scene", bundle.scene);
  doc.set_int("stride", bundle.stride);
  doc.set_int("seed", static_cast<int64_t>(bundle.seed));
  doc.set_int("max_points_per_frame",
              static_cast<int64_t>(bundle.max_points_per_frame));
  doc.set_double("occlusion_tolerance", bundle.occlusion_tolerance);
  doc.set_int("min_frames", bundle.min_frames);
  doc.set_double("max_min_distance", bundle.max_min_distance);
  doc.set_bool("drop_ineligible", bundle.drop_ineligible);
  doc.set_double("max_speed_error", bundle.max_speed_error);
  if (!bundle.external_depth.empty()) {
    doc.set("external_depth", bundle.external_depth);
  }

  std::string cams;
  for (size_t k = 0; k < bundle.camera_names.size(); ++k) {
    if (k) cams += ' ';
    cams += bundle.camera_names[k];
  }
  doc.set("cameras", cams);
  for (size_t k = 0; k < bundle.camera_names.size(); ++k) {
    doc.set("camera." + bundle.camera_names[k] + ".size",
            std::to_string(bundle.camera_sizes[k].first) + " " +
                std::to_string(bundle.camera_sizes[k].second));
  }

  std::string ids;
  for (const auto& ob : bundle.objects) {
    if (!ids.empty()) ids += ' ';
    ids += ob.tracks.object_id;
  }
  doc.set("objects", ids);
  for (const auto& [id, reason] : bundle.skipped) {
    doc.set("skipped." + id, reason);
  }

  for (const auto& ob : bundle.objects) {
    const std::string& id = ob.tracks.object_id;
    size_t n = ob.tracks.track_count();
    doc.set_int(okey(id, "tracks"), static_cast<int64_t>(n));
    doc.set_int(okey(id, "rejected_tracks"),
                static_cast<int64_t>(ob.rejected_tracks));
    if (ob.speed) {
      doc.set_double(okey(id, "speed_p25"), ob.speed->p25);
      doc.set_double(okey(id, "speed_p50"), ob.speed->p50);
      doc.set_double(okey(id, "speed_p75"), ob.speed->p75);
      doc.set_double(okey(id, "speed_p95"), ob.speed->p95);
      doc.set_double(okey(id, "speed_p99"), ob.speed->p99);
    }
    for (size_t k = 0; k < bundle.camera_names.size(); ++k) {
      const EligibilityReport& rep = ob.eligibility[k];
      std::string base = "camera." + bundle.camera_names[k] + ".";
      doc.set_bool(okey(id, base + "eligible"), rep.eligible);
      if (!rep.reasons.empty()) {
        std::string rs;
        for (size_t r = 0; r < rep.reasons.size(); ++r) {
          if (r) rs += ' ';
          rs += rep.reasons[r];
        }
        doc.set(okey(id, base + "reasons"), rs);
      }
      doc.set_int(okey(id, base + "longest_run"), rep.longest_in_fov_run);
      doc.set_int(okey(id, base + "in_fov_frames"), rep.total_in_fov_frames);
      doc.set_double(okey(id, base + "min_distance"), rep.min_distance);
    }

    fs::path odir = dir / "objects" / id;
    fs::create_directories(odir);
    size_t cells = n * static_cast<size_t>(bundle.frame_count);

    std::vector<int64_t> sources(n);
    for (size_t i = 0; i < n; ++i) sources[i] = ob.tracks.source_frames[i] - 1;
    write_i64_file(odir / "source_frames.i64le", sources);

    std::vector<float> xyz(cells * 3);
    for (size_t c = 0; c < cells; ++c) {
      xyz[3 * c] = static_cast<float>(ob.tracks.x[c]);
      xyz[3 * c + 1] = static_cast<float>(ob.tracks.y[c]);
      xyz[3 * c + 2] = static_cast<float>(ob.tracks.z[c]);
    }
    write_f32_file(odir / "tracks_3d.f32le", xyz);

    for (size_t k = 0; k < bundle.camera_names.size(); ++k) {
      const TrackSet2D& v = ob.views[k];
      fs::path cdir = odir / bundle.camera_names[k];
      fs::create_directories(cdir);
      std::vector<float> pix(cells * 2), rng(cells);
      for (size_t c = 0; c < cells; ++c) {
        pix[2 * c] = static_cast<float>(v.px[c]);
        pix[2 * c + 1] = static_cast<float>(v.py[c]);
        rng[c] = static_cast<float>(v.range[c]);
      }
      write_f32_file(cdir / "tracks_2d.f32le", pix);
      write_f32_file(cdir / "range.f32le", rng);
      write_u8_file(cdir / "occlusion.u8", ob.occlusion[k].occluded);
      write_u8_file(cdir / "fov.u8", v.in_fov);
    }
  }

  doc.write_file(dir / "manifest.txt");
}

TrackBundle read_track_bundle(const fs::path& dir) {
  fs::path manifest = dir / "manifest.txt";
  if (!fs::exists(manifest)) {
    fail(ErrorKind::ingestion, "missing manifest: " + manifest.string());
  }
  KeyValueDoc doc = KeyValueDoc::parse_file(manifest);
  if (doc.get("format") != kFormat) {
    fail(ErrorKind::ingestion,
         "not a track bundle: format = '" + doc.get("format") + "'");
  }
  if (doc.get_int("version") != 1) {
    fail(ErrorKind::ingestion,
         "unsupported track bundle version " +
             std::to_string(doc.get_int("version")));
  }

  TrackBundle b;
  b.frame_count = static_cast<int>(doc.get_int("frames"));
  if (b.frame_count < 1) {
    fail(ErrorKind::corruption, "track bundle has no frames");
  }
  b.frame_rate = doc.get_double("frame_rate");
  b.scene = doc.get_or("scene", "");
  b.stride = static_cast<int>(doc.get_int("stride"));
  b.seed = static_cast<uint64_t>(doc.get_int("seed"));
  b.max_points_per_frame =
      static_cast<size_t>(doc.get_int("max_points_per_frame"));
  b.occlusion_tolerance = doc.get_double("occlusion_tolerance");
  b.min_frames = static_cast<int>(doc.get_int("min_frames"));
  b.max_min_distance = doc.get_double("max_min_distance");
  b.drop_ineligible = doc.get_bool("drop_ineligible");
  b.max_speed_error = doc.get_double("max_speed_error");
  b.external_depth = doc.get_or("external_depth", "");

  for (const auto& name : doc.get_strings("cameras")) {
    if (!camera_id_from_string(name)) {
      fail(ErrorKind::corruption, "unknown camera '" + name + "' in manifest");
    }
    auto size = doc.get_doubles("camera." + name + ".size");
    if (size.size() != 2 || size[0] < 1 || size[1] < 1) {
      fail(ErrorKind::corruption, "camera '" + name + "': bad size entry");
    }
    b.camera_names.push_back(name);
    b.camera_sizes.emplace_back(static_cast<int>(size[0]),
                                static_cast<int>(size[1]));
  }

  for (const auto& key : doc.keys_with_prefix("skipped.")) {
    b.skipped.emplace_back(key.substr(8), doc.get(key));
  }

  size_t frames = static_cast<size_t>(b.frame_count);
  for (const auto& id : doc.get_strings("objects")) {
    ObjectAnnotation ob;
    auto n = static_cast<size_t>(doc.get_int(okey(id, "tracks")));
    if (n == 0) {
      fail(ErrorKind::corruption, "object '" + id + "': zero tracks");
    }
    ob.rejected_tracks =
        static_cast<size_t>(doc.get_int_or(okey(id, "rejected_tracks"), 0));
    size_t cells = n * frames;
    fs::path odir = dir / "objects" / id;

    ob.tracks.object_id = id;
    ob.tracks.frame_count = b.frame_count;
    auto sources = read_i64_file(odir / "source_frames.i64le", n);
    ob.tracks.source_frames.resize(n);
    for (size_t i = 0; i < n; ++i) {
      if (sources[i] < 0 || sources[i] >= b.frame_count) {
        fail(ErrorKind::corruption,
             "object '" + id + "': source frame " +
                 std::to_string(sources[i]) + " outside the scene");
      }
      ob.tracks.source_frames[i] = static_cast<int>(sources[i]) + 1;
    }
    auto xyz = read_f32_file(odir / "tracks_3d.f32le", cells * 3);
    ob.tracks.x.resize(cells);
    ob.tracks.y.resize(cells);
    ob.tracks.z.resize(cells);
    for (size_t c = 0; c < cells; ++c) {
      ob.tracks.x[c] = xyz[3 * c];
      ob.tracks.y[c] = xyz[3 * c + 1];
      ob.tracks.z[c] = xyz[3 * c + 2];
    }

    if (doc.has(okey(id, "speed_p50"))) {
      SpeedErrorStats s;
      s.object_id = id;
      s.p25 = doc.get_double(okey(id, "speed_p25"));
      s.p50 = doc.get_double(okey(id, "speed_p50"));
      s.p75 = doc.get_double(okey(id, "speed_p75"));
      s.p95 = doc.get_double(okey(id, "speed_p95"));
      s.p99 = doc.get_double(okey(id, "speed_p99"));
      ob.speed = std::move(s);
    }

    for (size_t k = 0; k < b.camera_names.size(); ++k) {
      const std::string& cam = b.camera_names[k];
      fs::path cdir = odir / cam;
      TrackSet2D v;
      v.object_id = id;
      v.camera_id = *camera_id_from_string(cam);
      v.frame_count = b.frame_count;
      auto pix = read_f32_file(cdir / "tracks_2d.f32le", cells * 2);
      v.px.resize(cells);
      v.py.resize(cells);
      for (size_t c = 0; c < cells; ++c) {
        v.px[c] = pix[2 * c];
        v.py[c] = pix[2 * c + 1];
      }
      auto rng = read_f32_file(cdir / "range.f32le", cells);
      v.range.assign(rng.begin(), rng.end());
      v.in_fov = read_u8_file(cdir / "fov.u8", cells);

      OcclusionMap occ;
      occ.object_id = id;
      occ.camera_id = v.camera_id;
      occ.frame_count = b.frame_count;
      occ.occluded = read_u8_file(cdir / "occlusion.u8", cells);
      occ.fov = v.in_fov;
      for (size_t c = 0; c < cells; ++c) {
        if (v.in_fov[c] > 1 || occ.occluded[c] > 1) {
          fail(ErrorKind::corruption,
               "object '" + id + "': flag bytes must be 0 or 1");
        }
        if (!v.in_fov[c] && !occ.occluded[c]) {
          fail(ErrorKind::corruption,
               "object '" + id + "': out-of-view entry marked visible");
        }
      }

      std::string base = "camera." + cam + ".";
      EligibilityReport rep;
      rep.object_id = id;
      rep.camera_id = v.camera_id;
      rep.eligible = doc.get_bool(okey(id, base + "eligible"));
      if (doc.has(okey(id, base + "reasons"))) {
        rep.reasons = doc.get_strings(okey(id, base + "reasons"));
      }
      rep.longest_in_fov_run =
          static_cast<int>(doc.get_int(okey(id, base + "longest_run")));
      rep.total_in_fov_frames =
          static_cast<int>(doc.get_int(okey(id, base + "in_fov_frames")));
      rep.min_distance = doc.get_double(okey(id, base + "min_distance"));
      if (rep.eligible != rep.reasons.empty()) {
        fail(ErrorKind::corruption,
             "object '" + id + "': eligibility flag disagrees with reasons");
      }

      ob.views.push_back(std::move(v));
      ob.occlusion.push_back(std::move(occ));
      ob.eligibility.push_back(std::move(rep));
    }
    b.objects.push_back(std::move(ob));
  }

  check_consistent(b);
  return b;
}

}  // namespace rigidtrack
