#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rigidtrack/occlusion.hpp"
#include "rigidtrack/quality.hpp"
#include "rigidtrack/tracks.hpp"

namespace rigidtrack {

// Everything the annotator produced for one object. views, occlusion, and
// eligibility run parallel to the bundle's camera list.
struct ObjectAnnotation {
  TrackSet3D tracks;
  std::vector<TrackSet2D> views;
  std::vector<OcclusionMap> occlusion;
  std::vector<EligibilityReport> eligibility;
  std::optional<SpeedErrorStats> speed;  // absent without annotated velocities
  size_t rejected_tracks = 0;            // rows removed by the speed filter
};

// Annotation output for one scene, with the settings echoed so a consumer
// can reproduce the run. The worker count is deliberately not recorded: it
// cannot change the output.
struct TrackBundle {
  int frame_count = 0;
  double frame_rate = 10;
  std::string scene;  // source scene directory as given to the annotator

  int stride = 1;
  uint64_t seed = 1;
  size_t max_points_per_frame = 0;  // 0 keeps every box point
  double occlusion_tolerance = kDefaultOcclusionTolerance;
  int min_frames = kDefaultMinFrames;
  double max_min_distance = kDefaultMaxMinDistance;
  bool drop_ineligible = false;
  double max_speed_error = 0;     // 0 disables the speed filter
  std::string external_depth;     // depth map source dir; empty = computed

  std::vector<std::string> camera_names;          // annotation order
  std::vector<std::pair<int, int>> camera_sizes;  // width, height
  std::vector<ObjectAnnotation> objects;
  // Objects the annotator gave up on, with the reason; the rest of the
  // bundle is still valid.
  std::vector<std::pair<std::string, std::string>> skipped;

  const ObjectAnnotation* object(const std::string& id) const;
};

// Directory layout: manifest.txt plus per-object binary arrays under
// objects/<id>/ (source_frames.i64le, tracks_3d.f32le interleaved xyz) and
// objects/<id>/<camera>/ (tracks_2d.f32le interleaved, range.f32le,
// occlusion.u8, fov.u8). Frames are 0-based on disk, 1-based in memory.
void write_track_bundle(const std::filesystem::path& dir,
                        const TrackBundle& bundle);
TrackBundle read_track_bundle(const std::filesystem::path& dir);

}  // namespace rigidtrack
