#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtmc/types.hpp"

namespace mtmc {

struct IngestConfig {
  double score_threshold = 0.0;
  double min_area_fraction = 0.0;
  int frame_width = 1920;
  int frame_height = 1080;
  /// Expected descriptor length; 0 accepts whatever the feature header declares.
  std::size_t feature_dim = 0;

  void validate() const;
};

/// Score and size predicates applied to every ingested row.
bool passes_filters(const Detection& det, const IngestConfig& config);

/// Reads one camera's detection CSV and its row-aligned feature CSV.
/// Returns the filtered detections in ascending frame order.
std::vector<Detection> load_detections(const std::filesystem::path& detections_path,
                                       const std::filesystem::path& features_path, int camera_id,
                                       const IngestConfig& config);

std::vector<Detection> parse_detections(std::istream& detections, std::istream& features,
                                        int camera_id, const IngestConfig& config,
                                        const std::string& source_name = "<stream>");

/// Writes `frame,id,x,y,w,h,score,class` rows (id = -1) and the matching
/// `k=<dim>` feature file.
void write_detections(std::ostream& detections, std::ostream& features,
                      std::span<const Detection> rows, std::size_t feature_dim);

/// One batch per frame in [start, end], merging all cameras. Frames without
/// detections produce empty batches.
std::vector<FrameBatch> batch_by_frame(std::span<const Detection> detections, int start, int end);

/// Pull-based line reader; lets callers observe exactly what has been read.
class LineSource {
 public:
  virtual ~LineSource() = default;
  virtual std::optional<std::string> next_line() = 0;
  virtual std::string name() const = 0;
};

class FileLineSource final : public LineSource {
 public:
  explicit FileLineSource(std::filesystem::path path);
  std::optional<std::string> next_line() override;
  std::string name() const override { return path_.string(); }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

class StringLineSource final : public LineSource {
 public:
  StringLineSource(std::string text, std::string name = "<memory>");
  std::optional<std::string> next_line() override;
  std::string name() const override { return name_; }

 private:
  std::string text_;
  std::string name_;
  std::size_t pos_ = 0;
};

/// Incremental per-camera reader. Rows are pulled only up to the first row
/// belonging to a later frame, which is held back until that frame is asked
/// for. Frames must be non-decreasing within the file.
class DetectionStream {
 public:
  DetectionStream(int camera_id, std::unique_ptr<LineSource> detections,
                  std::unique_ptr<LineSource> features, IngestConfig config);

  /// Filtered detections of `frame`. Frames must be requested in increasing order.
  std::vector<Detection> take_frame(int frame);

  /// True once every row has been delivered or discarded.
  bool exhausted();

  int camera_id() const { return camera_id_; }
  std::size_t feature_dim() const { return feature_dim_; }

 private:
  void read_feature_header();
  std::optional<Detection> read_row();
  void check_trailing_features();

  int camera_id_;
  std::unique_ptr<LineSource> detections_;
  std::unique_ptr<LineSource> features_;
  IngestConfig config_;
  std::size_t feature_dim_ = 0;
  bool header_read_ = false;
  bool eof_ = false;
  bool seen_content_ = false;
  std::size_t line_no_ = 0;
  std::optional<Detection> pending_;
  int last_frame_ = -1;
  int last_requested_ = -1;
};

}  // namespace mtmc
