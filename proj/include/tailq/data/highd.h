#pragma once

#include <filesystem>
#include <vector>

#include "tailq/data/sample.h"

namespace tailq::data {

/// One row of a highD tracks file (the columns this project uses).
struct TrackRecord {
  int frame = 0;
  int id = 0;
  double x = 0.0;  // m
  int lane_id = 0;
  double x_velocity = 0.0;      // m/s
  double y_velocity = 0.0;      // m/s
  double x_acceleration = 0.0;  // m/s^2
  double y_acceleration = 0.0;  // m/s^2
  double dhw = 0.0;             // m
  double thw = 0.0;             // s
  double ttc = 0.0;             // s
  int preceding_id = 0;         // 0 = none

  bool operator==(const TrackRecord&) const = default;
};

/// Lane ids per driving direction. The upper half of a highD recording
/// drives toward -x, the lower half toward +x.
struct LaneInventory {
  int upper_first = 0;
  int upper_last = -1;
  int lower_first = 0;
  int lower_last = -1;

  bool has_upper() const { return upper_last >= upper_first; }
  bool has_lower() const { return lower_last >= lower_first; }
};

struct HighdRecording {
  double frame_rate = 25.0;
  LaneInventory lanes;
  std::vector<TrackRecord> records;
};

/// Reads a tracks CSV and its recording-meta CSV. Columns are located by
/// header name; extra columns are ignored. Lane inventory comes from the
/// meta file's upperLaneMarkings / lowerLaneMarkings when present and is
/// otherwise inferred from the lanes observed per direction.
/// Throws DataError naming a missing column or the row of a malformed cell,
/// MissingArtifactError when a file cannot be opened.
HighdRecording parse_highd(const std::filesystem::path& tracks, const std::filesystem::path& recording_meta);

struct ExtractOptions {
  int dims = 1;
  double feature_cap = kDefaultFeatureCap;
  /// Keep only frames with frame % frame_stride == 0.
  int frame_stride = 1;
};

struct SkipReport {
  std::size_t no_leader = 0;        // precedingId == 0
  std::size_t dangling_leader = 0;  // leader has no record at that frame
  std::size_t invalid_gap = 0;      // dhw non-finite or <= 0, thw non-finite
  std::size_t stride = 0;           // dropped by frame_stride

  bool operator==(const SkipReport&) const = default;
};

struct Extraction {
  std::vector<Sample> samples;
  SkipReport skipped;
};

/// One sample per (vehicle, frame) with a leader. Velocities are speeds
/// (absolute x velocity); accelerations are expressed in the driving
/// direction. TTC/THW that are nonpositive or exceed the cap become the cap.
Extraction extract_pairs(const HighdRecording& recording, const ExtractOptions& options = {});

}  // namespace tailq::data
