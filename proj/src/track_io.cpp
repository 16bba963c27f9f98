#include "mtmc/track_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "mtmc/csv.hpp"

namespace mtmc {

std::string camera_file_name(int camera_id) { return fmt::format("cam{:03d}.csv", camera_id); }

std::vector<int> list_camera_files(const std::filesystem::path& dir) {
  std::vector<int> ids;
  if (!std::filesystem::is_directory(dir)) return ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() < 8 || name.rfind("cam", 0) != 0 || entry.path().extension() != ".csv") continue;
    const auto id = csv::parse_int(name.substr(3, name.size() - 7));
    if (id && *id >= 0) ids.push_back(static_cast<int>(*id));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void write_track_rows(std::ostream& out, std::span<const OutputRow> rows) {
  for (const auto& r : rows) {
    out << r.frame << ',' << r.track_id << ',' << csv::format_double(r.bbox.x) << ','
        << csv::format_double(r.bbox.y) << ',' << csv::format_double(r.bbox.w) << ','
        << csv::format_double(r.bbox.h) << ',' << csv::format_double(r.phi) << ','
        << csv::format_double(r.lambda) << ',' << (r.synthetic ? 1 : 0) << '\n';
  }
}

std::vector<OutputRow> read_track_rows(std::istream& in, int camera_id,
                                       const std::string& source_name) {
  std::vector<OutputRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_blank(line)) continue;
    const auto fields = csv::split(line);
    if (first && !fields.empty() && !csv::parse_double(fields[0])) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 8 && fields.size() != 9) {
      throw IngestError(fmt::format("{}:{}: expected 8 or 9 columns, found {}", source_name,
                                    line_no, fields.size()));
    }
    const auto frame = csv::parse_int(fields[0]);
    const auto id = csv::parse_int(fields[1]);
    const auto x = csv::parse_double(fields[2]);
    const auto y = csv::parse_double(fields[3]);
    const auto w = csv::parse_double(fields[4]);
    const auto h = csv::parse_double(fields[5]);
    const auto phi = csv::parse_double(fields[6]);
    const auto lambda = csv::parse_double(fields[7]);
    const auto synthetic = fields.size() == 9 ? csv::parse_int(fields[8]) : std::optional<long long>(0);
    if (!frame || !id || !x || !y || !w || !h || !phi || !lambda || !synthetic ||
        (*synthetic != 0 && *synthetic != 1)) {
      throw IngestError(fmt::format("{}:{}: malformed track row", source_name, line_no));
    }
    rows.push_back(OutputRow{camera_id, static_cast<int>(*frame), static_cast<int>(*id),
                             BBox{*x, *y, *w, *h}, *phi, *lambda, *synthetic == 1});
  }
  return rows;
}

std::vector<OutputRow> read_track_file(const std::filesystem::path& path, int camera_id) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  return read_track_rows(in, camera_id, path.string());
}

TrackFileWriter::TrackFileWriter(const std::filesystem::path& dir, std::span<const int> camera_ids) {
  std::filesystem::create_directories(dir);
  for (const int id : camera_ids) {
    const auto path = dir / camera_file_name(id);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IngestError("cannot create " + path.string());
    files_.emplace(id, std::move(out));
  }
}

void TrackFileWriter::write(std::span<const OutputRow> rows) {
  for (const auto& row : rows) {
    auto it = files_.find(row.camera);
    if (it == files_.end()) {
      throw IngestError("track row for unknown camera " + std::to_string(row.camera));
    }
    write_track_rows(it->second, std::span<const OutputRow>(&row, 1));
  }
}

void TrackFileWriter::flush() {
  for (auto& [id, file] : files_) file.flush();
}

}  // namespace mtmc
