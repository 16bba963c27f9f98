#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mtmc/tracker.hpp"

namespace mtmc {

/// `cam003.csv` style file name shared by every per-camera file family.
std::string camera_file_name(int camera_id);

/// Camera ids of every `camNNN.csv` file in `dir`, ascending.
std::vector<int> list_camera_files(const std::filesystem::path& dir);

/// `frame,track_id,x,y,w,h,phi,lambda,synthetic` rows, no header.
void write_track_rows(std::ostream& out, std::span<const OutputRow> rows);

/// Parses a track file. A header line is skipped; the synthetic column may be
/// omitted (read as 0).
std::vector<OutputRow> read_track_rows(std::istream& in, int camera_id,
                                       const std::string& source_name = "<stream>");
std::vector<OutputRow> read_track_file(const std::filesystem::path& path, int camera_id);

/// Appends rows to one open file per camera, creating them on construction.
class TrackFileWriter {
 public:
  TrackFileWriter(const std::filesystem::path& dir, std::span<const int> camera_ids);
  void write(std::span<const OutputRow> rows);
  void flush();

 private:
  std::map<int, std::ofstream> files_;
};

}  // namespace mtmc
