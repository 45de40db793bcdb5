#include "tailq/data/sample_store.h"

#include "tailq/error.h"
#include "tailq/io/csv.h"

namespace tailq::data {

namespace {

std::vector<std::string> header_for(int dims) {
  std::vector<std::string> h;
  for (auto name : feature_names(dims)) h.emplace_back(name);
  for (auto name : action_names(dims)) h.emplace_back(name);
  return h;
}

}  // namespace

std::string samples_to_csv(const std::vector<Sample>& samples, int dims) {
  std::string out;
  const auto header = header_for(dims);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& s : samples) {
    const auto f = s.state.to_vector(dims);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += ',';
      out += io::format_double(f[i]);
    }
    for (int d = 0; d < dims; ++d) {
      out += ',';
      out += io::format_double(s.action[d]);
    }
    out += '\n';
  }
  return out;
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<Sample>& samples, int dims) {
  io::write_text_file(path, samples_to_csv(samples, dims));
}

SampleFile read_samples_csv(const std::filesystem::path& path) {
  const io::CsvTable table = io::read_csv(path);
  SampleFile file;
  if (table.header == header_for(1)) {
    file.dims = 1;
  } else if (table.header == header_for(2)) {
    file.dims = 2;
  } else {
    throw DataError(path.string() + ": unrecognized sample header");
  }
  const std::size_t nf = feature_count(file.dims);
  file.samples.reserve(table.rows.size());
  std::vector<double> f(nf);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t i = 0; i < nf; ++i) {
      f[i] = io::parse_double(table.rows[r][i], table.line_numbers[r], table.header[i]);
    }
    Sample s;
    s.state = StateFeatures::from_vector(f, file.dims);
    for (int d = 0; d < file.dims; ++d) {
      s.action[d] = io::parse_double(table.rows[r][nf + d], table.line_numbers[r], table.header[nf + d]);
    }
    file.samples.push_back(s);
  }
  return file;
}

}  // namespace tailq::data
