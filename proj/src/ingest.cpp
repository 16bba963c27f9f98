#include "mtmc/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "mtmc/csv.hpp"

namespace mtmc {

namespace {

constexpr std::size_t kDetectionColumns = 8;

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw IngestError(fmt::format("{}:{}: {}", source, line, what));
}

bool looks_like_header(std::string_view line) {
  const auto fields = csv::split(line);
  return !fields.empty() && !csv::parse_double(fields.front()).has_value();
}

std::optional<std::size_t> parse_feature_header(std::string_view line) {
  line = csv::trim(line);
  if (line.size() < 3 || line.substr(0, 2) != "k=") return std::nullopt;
  const auto k = csv::parse_int(line.substr(2));
  if (!k || *k <= 0) return std::nullopt;
  return static_cast<std::size_t>(*k);
}

Detection parse_detection_row(std::string_view line, int camera_id, const std::string& source,
                              std::size_t line_no) {
  const auto fields = csv::split(line);
  if (fields.size() != kDetectionColumns) {
    fail(source, line_no,
         fmt::format("expected {} columns, found {}", kDetectionColumns, fields.size()));
  }
  const auto frame = csv::parse_int(fields[0]);
  const auto id = csv::parse_int(fields[1]);
  const auto x = csv::parse_double(fields[2]);
  const auto y = csv::parse_double(fields[3]);
  const auto w = csv::parse_double(fields[4]);
  const auto h = csv::parse_double(fields[5]);
  const auto score = csv::parse_double(fields[6]);
  const auto cls = csv::parse_int(fields[7]);
  if (!frame || !id || !x || !y || !w || !h || !score || !cls) {
    fail(source, line_no, "non-numeric field");
  }
  Detection det;
  det.camera_id = camera_id;
  det.frame = static_cast<int>(*frame);
  det.bbox = BBox{*x, *y, *w, *h};
  det.score = *score;
  det.object_class = static_cast<int>(*cls);
  if (det.frame < 0) fail(source, line_no, "negative frame index");
  if (!is_valid(det.bbox)) fail(source, line_no, "bounding box must be finite with w > 0, h > 0");
  if (!(det.score >= 0.0 && det.score <= 1.0)) fail(source, line_no, "score outside [0, 1]");
  return det;
}

std::vector<double> parse_feature_row(std::string_view line, std::size_t dim,
                                      const std::string& source, std::size_t line_no) {
  const auto fields = csv::split(line);
  if (fields.size() != dim) {
    fail(source, line_no, fmt::format("feature dimension {} does not match k={}", fields.size(), dim));
  }
  std::vector<double> feature;
  feature.reserve(dim);
  for (const auto field : fields) {
    const auto v = csv::parse_double(field);
    if (!v || !std::isfinite(*v)) fail(source, line_no, "non-numeric feature value");
    feature.push_back(*v);
  }
  return feature;
}

std::size_t resolve_dim(std::optional<std::size_t> header, const IngestConfig& config,
                        const std::string& source) {
  if (!header) {
    throw IngestError(fmt::format("{}: missing or malformed 'k=<dim>' header", source));
  }
  if (config.feature_dim != 0 && *header != config.feature_dim) {
    throw IngestError(fmt::format("{}: feature dimension k={} but configuration expects {}", source,
                                  *header, config.feature_dim));
  }
  return *header;
}

}  // namespace

bool is_valid(const BBox& box) {
  return std::isfinite(box.x) && std::isfinite(box.y) && std::isfinite(box.w) &&
         std::isfinite(box.h) && box.w > 0.0 && box.h > 0.0;
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

void IngestConfig::validate() const {
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    throw ConfigError("score_threshold must lie in [0, 1]");
  }
  if (!(min_area_fraction >= 0.0 && min_area_fraction < 1.0)) {
    throw ConfigError("min_area_fraction must lie in [0, 1)");
  }
  if (frame_width <= 0 || frame_height <= 0) {
    throw ConfigError("frame dimensions must be positive");
  }
}

bool passes_filters(const Detection& det, const IngestConfig& config) {
  if (det.score < config.score_threshold) return false;
  const double frame_area =
      static_cast<double>(config.frame_width) * static_cast<double>(config.frame_height);
  return det.bbox.area() >= config.min_area_fraction * frame_area;
}

std::vector<Detection> parse_detections(std::istream& detections, std::istream& features,
                                        int camera_id, const IngestConfig& config,
                                        const std::string& source_name) {
  config.validate();
  const std::string feat_source = source_name + " (features)";

  std::string line;
  std::size_t feat_line_no = 0;
  std::optional<std::size_t> header;
  bool feature_file_empty = true;
  while (std::getline(features, line)) {
    ++feat_line_no;
    if (csv::is_blank(line)) continue;
    feature_file_empty = false;
    header = parse_feature_header(line);
    break;
  }

  std::vector<Detection> all;
  std::size_t det_line_no = 0;
  bool first = true;
  std::size_t dim = 0;
  bool dim_resolved = false;
  while (std::getline(detections, line)) {
    ++det_line_no;
    if (csv::is_blank(line)) continue;
    if (first && looks_like_header(line)) {
      first = false;
      continue;
    }
    first = false;
    Detection det = parse_detection_row(line, camera_id, source_name, det_line_no);

    if (!dim_resolved) {
      if (feature_file_empty) {
        throw IngestError(fmt::format("{}: feature row count mismatch (feature file is empty)",
                                      feat_source));
      }
      dim = resolve_dim(header, config, feat_source);
      dim_resolved = true;
    }
    std::string feat_line;
    bool got = false;
    while (std::getline(features, feat_line)) {
      ++feat_line_no;
      if (csv::is_blank(feat_line)) continue;
      got = true;
      break;
    }
    if (!got) {
      fail(feat_source, feat_line_no,
           fmt::format("feature row count mismatch: no feature row for detection line {}",
                       det_line_no));
    }
    det.feature = parse_feature_row(feat_line, dim, feat_source, feat_line_no);
    all.push_back(std::move(det));
  }
  if (!feature_file_empty && !dim_resolved) resolve_dim(header, config, feat_source);
  while (std::getline(features, line)) {
    ++feat_line_no;
    if (!csv::is_blank(line)) {
      fail(feat_source, feat_line_no, "feature row count mismatch: more feature rows than detections");
    }
  }

  std::vector<Detection> kept;
  kept.reserve(all.size());
  for (auto& det : all) {
    if (passes_filters(det, config)) kept.push_back(std::move(det));
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
  return kept;
}

std::vector<Detection> load_detections(const std::filesystem::path& detections_path,
                                       const std::filesystem::path& features_path, int camera_id,
                                       const IngestConfig& config) {
  std::ifstream det(detections_path);
  if (!det) throw IngestError("cannot open " + detections_path.string());
  std::ifstream feat(features_path);
  if (!feat) throw IngestError("cannot open " + features_path.string());
  return parse_detections(det, feat, camera_id, config, detections_path.string());
}

void write_detections(std::ostream& detections, std::ostream& features,
                      std::span<const Detection> rows, std::size_t feature_dim) {
  features << "k=" << feature_dim << '\n';
  for (const auto& det : rows) {
    if (det.feature.size() != feature_dim) {
      throw IngestError("write_detections: feature dimension mismatch");
    }
    detections << det.frame << ",-1," << csv::format_double(det.bbox.x) << ','
               << csv::format_double(det.bbox.y) << ',' << csv::format_double(det.bbox.w) << ','
               << csv::format_double(det.bbox.h) << ',' << csv::format_double(det.score) << ','
               << det.object_class << '\n';
    for (std::size_t i = 0; i < det.feature.size(); ++i) {
      if (i) features << ',';
      features << csv::format_double(det.feature[i]);
    }
    features << '\n';
  }
}

std::vector<FrameBatch> batch_by_frame(std::span<const Detection> detections, int start, int end) {
  std::vector<FrameBatch> batches;
  if (end < start) return batches;
  batches.resize(static_cast<std::size_t>(end - start + 1));
  for (int f = start; f <= end; ++f) batches[static_cast<std::size_t>(f - start)].frame = f;
  // Stable by camera so batch order is deterministic: camera id, then file order.
  std::vector<const Detection*> order;
  order.reserve(detections.size());
  for (const auto& d : detections) {
    if (d.frame >= start && d.frame <= end) order.push_back(&d);
  }
  std::stable_sort(order.begin(), order.end(), [](const Detection* a, const Detection* b) {
    return a->camera_id < b->camera_id;
  });
  for (const Detection* d : order) {
    batches[static_cast<std::size_t>(d->frame - start)].detections.push_back(*d);
  }
  return batches;
}

// ---------------------------------------------------------------------------

FileLineSource::FileLineSource(std::filesystem::path path) : path_(std::move(path)), in_(path_) {
  if (!in_) throw IngestError("cannot open " + path_.string());
}

std::optional<std::string> FileLineSource::next_line() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  return line;
}

StringLineSource::StringLineSource(std::string text, std::string name)
    : text_(std::move(text)), name_(std::move(name)) {}

std::optional<std::string> StringLineSource::next_line() {
  if (pos_ >= text_.size()) return std::nullopt;
  const auto nl = text_.find('\n', pos_);
  std::string line;
  if (nl == std::string::npos) {
    line = text_.substr(pos_);
    pos_ = text_.size();
  } else {
    line = text_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
  }
  return line;
}

DetectionStream::DetectionStream(int camera_id, std::unique_ptr<LineSource> detections,
                                 std::unique_ptr<LineSource> features, IngestConfig config)
    : camera_id_(camera_id),
      detections_(std::move(detections)),
      features_(std::move(features)),
      config_(config) {
  config_.validate();
}

void DetectionStream::read_feature_header() {
  header_read_ = true;
  while (auto line = features_->next_line()) {
    if (csv::is_blank(*line)) continue;
    feature_dim_ = resolve_dim(parse_feature_header(*line), config_, features_->name());
    return;
  }
  feature_dim_ = 0;
}

std::optional<Detection> DetectionStream::read_row() {
  if (eof_) return std::nullopt;
  while (auto line = detections_->next_line()) {
    ++line_no_;
    if (csv::is_blank(*line)) continue;
    const bool first_content = !seen_content_;
    seen_content_ = true;
    if (first_content && looks_like_header(*line)) continue;
    Detection det = parse_detection_row(*line, camera_id_, detections_->name(), line_no_);
    if (det.frame < last_frame_) {
      fail(detections_->name(), line_no_,
           fmt::format("frame {} after frame {}: rows must be in non-decreasing frame order",
                       det.frame, last_frame_));
    }
    last_frame_ = det.frame;
    if (feature_dim_ == 0) {
      throw IngestError(fmt::format("{}: feature row count mismatch (feature file is empty)",
                                    features_->name()));
    }
    std::optional<std::string> feat;
    while ((feat = features_->next_line())) {
      if (!csv::is_blank(*feat)) break;
    }
    if (!feat) {
      fail(features_->name(), line_no_,
           "feature row count mismatch: no feature row for detection line " +
               std::to_string(line_no_));
    }
    det.feature = parse_feature_row(*feat, feature_dim_, features_->name(), line_no_);
    return det;
  }
  eof_ = true;
  check_trailing_features();
  return std::nullopt;
}

void DetectionStream::check_trailing_features() {
  while (auto line = features_->next_line()) {
    if (!csv::is_blank(*line)) {
      throw IngestError(features_->name() +
                        ": feature row count mismatch: more feature rows than detections");
    }
  }
}

std::vector<Detection> DetectionStream::take_frame(int frame) {
  if (frame <= last_requested_) {
    throw IngestError(fmt::format("{}: frame {} requested after frame {}", detections_->name(),
                                  frame, last_requested_));
  }
  last_requested_ = frame;
  if (!header_read_) read_feature_header();

  std::vector<Detection> out;
  while (true) {
    if (!pending_) pending_ = read_row();
    if (!pending_) break;
    if (pending_->frame > frame) break;
    // Rows from skipped-over earlier frames are dropped with the rest of that frame.
    if (pending_->frame == frame && passes_filters(*pending_, config_)) {
      out.push_back(std::move(*pending_));
    }
    pending_.reset();
  }
  return out;
}

bool DetectionStream::exhausted() {
  if (!header_read_) read_feature_header();
  if (pending_) return false;
  pending_ = read_row();
  return !pending_.has_value();
}

}  // namespace mtmc
