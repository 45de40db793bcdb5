#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tailq/data/sample.h"

namespace tailq::data {

/// Columnar sample CSV. Header (1D):
///   dhw,thw,ttc,v_follow,v_lead,accel_long
/// and (2D):
///   dhw,thw,ttc,v_follow,v_lead,lanes_left,lanes_right,accel_long,accel_lat
/// Values use the shortest round-trip decimal representation.
std::string samples_to_csv(const std::vector<Sample>& samples, int dims);
void write_samples_csv(const std::filesystem::path& path, const std::vector<Sample>& samples, int dims);

struct SampleFile {
  int dims = 1;
  std::vector<Sample> samples;
};

/// dims is inferred from the header. Throws DataError on an unknown layout.
SampleFile read_samples_csv(const std::filesystem::path& path);

}  // namespace tailq::data
