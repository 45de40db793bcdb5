#include "tailq/data/highd.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "tailq/error.h"
#include "tailq/io/csv.h"

namespace tailq::data {

namespace {

constexpr const char* kRequiredColumns[] = {"frame",         "id",  "x",   "laneId", "xVelocity",  "yVelocity",
                                            "xAcceleration", "yAcceleration", "dhw", "thw", "ttc", "precedingId"};

int require_column(const io::CsvTable& table, std::string_view name, const std::filesystem::path& path) {
  const int c = table.column(name);
  if (c < 0) throw DataError(path.string() + ": missing required column '" + std::string(name) + "'");
  return c;
}

int count_markings(const std::string& cell) {
  if (cell.empty()) return 0;
  return static_cast<int>(std::count(cell.begin(), cell.end(), ';')) + 1;
}

LaneInventory infer_lanes(const std::vector<TrackRecord>& records) {
  LaneInventory lanes;
  int up_lo = 1 << 30, up_hi = -(1 << 30), low_lo = 1 << 30, low_hi = -(1 << 30);
  for (const auto& r : records) {
    if (r.x_velocity < 0.0) {
      up_lo = std::min(up_lo, r.lane_id);
      up_hi = std::max(up_hi, r.lane_id);
    } else {
      low_lo = std::min(low_lo, r.lane_id);
      low_hi = std::max(low_hi, r.lane_id);
    }
  }
  if (up_hi >= up_lo) {
    lanes.upper_first = up_lo;
    lanes.upper_last = up_hi;
  }
  if (low_hi >= low_lo) {
    lanes.lower_first = low_lo;
    lanes.lower_last = low_hi;
  }
  return lanes;
}

double capped(double value, double cap) {
  if (!(value > 0.0) || value > cap) return cap;
  return value;
}

}  // namespace

HighdRecording parse_highd(const std::filesystem::path& tracks, const std::filesystem::path& recording_meta) {
  HighdRecording rec;

  const io::CsvTable meta = io::read_csv(recording_meta);
  const int rate_col = require_column(meta, "frameRate", recording_meta);
  if (meta.rows.empty()) throw DataError(recording_meta.string() + ": no recording row");
  rec.frame_rate = io::parse_double(meta.rows[0][rate_col], meta.line_numbers[0], "frameRate");
  if (!(rec.frame_rate > 0.0)) throw DataError(recording_meta.string() + ": frameRate must be positive");

  const io::CsvTable table = io::read_csv(tracks);
  int cols[std::size(kRequiredColumns)];
  for (std::size_t i = 0; i < std::size(kRequiredColumns); ++i) {
    cols[i] = require_column(table, kRequiredColumns[i], tracks);
  }
  rec.records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    auto num = [&](int k) { return io::parse_double(row[cols[k]], line, kRequiredColumns[k]); };
    auto integer = [&](int k) { return static_cast<int>(io::parse_integer(row[cols[k]], line, kRequiredColumns[k])); };
    TrackRecord t;
    t.frame = integer(0);
    t.id = integer(1);
    t.x = num(2);
    t.lane_id = integer(3);
    t.x_velocity = num(4);
    t.y_velocity = num(5);
    t.x_acceleration = num(6);
    t.y_acceleration = num(7);
    t.dhw = num(8);
    t.thw = num(9);
    t.ttc = num(10);
    t.preceding_id = integer(11);
    if (t.frame < 0) throw DataError(tracks.string() + ": negative frame at row " + std::to_string(line));
    rec.records.push_back(t);
  }

  const int up_col = meta.column("upperLaneMarkings");
  const int low_col = meta.column("lowerLaneMarkings");
  if (up_col >= 0 && low_col >= 0) {
    // highD numbers lane areas between consecutive markings from the top:
    // id 1 is the outer area above the upper road, so upper lanes are
    // 2..n_upper and lower lanes start two ids after that.
    const int n_upper = count_markings(meta.rows[0][up_col]);
    const int n_lower = count_markings(meta.rows[0][low_col]);
    if (n_upper >= 2) {
      rec.lanes.upper_first = 2;
      rec.lanes.upper_last = n_upper;
    }
    if (n_lower >= 2) {
      rec.lanes.lower_first = n_upper + 2;
      rec.lanes.lower_last = n_upper + n_lower;
    }
  } else {
    rec.lanes = infer_lanes(rec.records);
  }
  return rec;
}

Extraction extract_pairs(const HighdRecording& recording, const ExtractOptions& options) {
  check_dims(options.dims);
  if (options.frame_stride < 1) throw DomainError("frame_stride must be >= 1");
  auto key = [](int id, int frame) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(id)) << 32) | static_cast<std::uint32_t>(frame);
  };
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(recording.records.size());
  for (std::size_t i = 0; i < recording.records.size(); ++i) {
    const auto& r = recording.records[i];
    if (!index.emplace(key(r.id, r.frame), i).second) {
      throw DataError("duplicate record for vehicle " + std::to_string(r.id) + " at frame " +
                      std::to_string(r.frame));
    }
  }

  Extraction out;
  const LaneInventory& lanes = recording.lanes;
  for (const auto& r : recording.records) {
    if (r.frame % options.frame_stride != 0) {
      ++out.skipped.stride;
      continue;
    }
    if (r.preceding_id == 0) {
      ++out.skipped.no_leader;
      continue;
    }
    if (!std::isfinite(r.dhw) || r.dhw <= 0.0 || !std::isfinite(r.thw)) {
      ++out.skipped.invalid_gap;
      continue;
    }
    const auto leader = index.find(key(r.preceding_id, r.frame));
    if (leader == index.end()) {
      ++out.skipped.dangling_leader;
      continue;
    }
    const TrackRecord& lead = recording.records[leader->second];
    const double dir = r.x_velocity < 0.0 ? -1.0 : 1.0;

    Sample s;
    s.state.dhw = r.dhw;
    s.state.thw = capped(r.thw, options.feature_cap);
    s.state.ttc = capped(r.ttc, options.feature_cap);
    s.state.v_follow = std::abs(r.x_velocity);
    s.state.v_lead = std::abs(lead.x_velocity);
    s.action[0] = dir * r.x_acceleration;
    if (options.dims == 2) {
      if (dir > 0.0 && lanes.has_lower()) {
        s.state.lanes_left = std::max(0, r.lane_id - lanes.lower_first);
        s.state.lanes_right = std::max(0, lanes.lower_last - r.lane_id);
      } else if (dir < 0.0 && lanes.has_upper()) {
        s.state.lanes_left = std::max(0, lanes.upper_last - r.lane_id);
        s.state.lanes_right = std::max(0, r.lane_id - lanes.upper_first);
      }
      // Image y grows downward; the driver's left is -y when driving toward +x.
      s.action[1] = -dir * r.y_acceleration;
    }
    out.samples.push_back(s);
  }
  return out;
}

}  // namespace tailq::data
