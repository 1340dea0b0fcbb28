#pragma once

// One-hot feature encoding and the dense training matrix consumed by the
// classifiers.

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sveval/errors.hpp"
#include "sveval/types.hpp"

namespace sveval {

/// Dense row-major design matrix with binary labels and optional
/// per-record training weights (empty means unit weights).
struct Dataset {
  std::size_t cols = 0;
  std::vector<double> x;
  std::vector<int> y;
  std::vector<double> w;
  std::size_t unseen_categories = 0;  // rows that hit an unseen category level

  std::size_t rows() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
  double weight(std::size_t i) const noexcept { return w.empty() ? 1.0 : w[i]; }
};

/// Copies the selected rows (repeats allowed) into a new dataset.
inline Dataset take_rows(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.cols = data.cols;
  out.x.reserve(rows.size() * data.cols);
  out.y.reserve(rows.size());
  if (!data.w.empty()) out.w.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto src = data.row(r);
    out.x.insert(out.x.end(), src.begin(), src.end());
    out.y.push_back(data.y[r]);
    if (!data.w.empty()) out.w.push_back(data.w[r]);
  }
  return out;
}

/// Maps records onto numeric columns: numeric features pass through,
/// categorical features become one indicator per level seen at fit time.
/// With drop_first the first (sorted) level of each categorical is the
/// reference and gets no column, which keeps a model with an intercept
/// identifiable. Unseen levels encode as all zeros.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;

  FeatureEncoder(std::vector<FeatureSpec> features, std::vector<std::vector<std::string>> levels,
                 bool drop_first)
      : features_(std::move(features)), levels_(std::move(levels)), drop_first_(drop_first) {
    if (levels_.size() != features_.size()) throw DataError("encoder: one level list per feature");
    lookup_.resize(features_.size());
    offsets_.resize(features_.size());
    for (std::size_t f = 0; f < features_.size(); ++f) {
      offsets_[f] = width_;
      if (features_[f].kind == FeatureKind::numeric) {
        ++width_;
        continue;
      }
      for (std::size_t l = 0; l < levels_[f].size(); ++l) lookup_[f][levels_[f][l]] = l;
      const std::size_t n = levels_[f].size();
      width_ += drop_first_ && n > 0 ? n - 1 : n;
    }
  }

  static FeatureEncoder fit(const RecordFrame& frame, std::span<const std::size_t> rows,
                            bool drop_first = false) {
    const auto& features = frame.features();
    std::vector<std::vector<std::string>> levels(features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
      if (features[f].kind != FeatureKind::categorical) continue;
      for (std::size_t r : rows) levels[f].push_back(std::get<std::string>(frame[r].features[f]));
      std::sort(levels[f].begin(), levels[f].end());
      levels[f].erase(std::unique(levels[f].begin(), levels[f].end()), levels[f].end());
    }
    return FeatureEncoder(features, std::move(levels), drop_first);
  }

  std::size_t width() const noexcept { return width_; }
  const std::vector<FeatureSpec>& features() const noexcept { return features_; }
  const std::vector<std::vector<std::string>>& levels() const noexcept { return levels_; }
  bool drop_first() const noexcept { return drop_first_; }

  std::vector<std::string> column_names() const {
    std::vector<std::string> names;
    for (std::size_t f = 0; f < features_.size(); ++f) {
      if (features_[f].kind == FeatureKind::numeric) {
        names.push_back(features_[f].name);
        continue;
      }
      for (std::size_t l = drop_first_ ? 1 : 0; l < levels_[f].size(); ++l)
        names.push_back(features_[f].name + "=" + levels_[f][l]);
    }
    return names;
  }

  /// Writes the encoded record into `out` (size width()). Returns false
  /// when a category level was not seen at fit time. Throws DataError when
  /// the record does not match the fitted schema.
  bool encode(const Record& record, std::span<double> out) const {
    if (record.features.size() != features_.size())
      throw DataError("schema mismatch: record " + record.id + " has " +
                      std::to_string(record.features.size()) + " features, model expects " +
                      std::to_string(features_.size()));
    bool all_seen = true;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t f = 0; f < features_.size(); ++f) {
      const FeatureValue& v = record.features[f];
      if (features_[f].kind == FeatureKind::numeric) {
        const double* d = std::get_if<double>(&v);
        if (d == nullptr) throw DataError("schema mismatch: feature " + features_[f].name + " is not numeric");
        out[offsets_[f]] = *d;
        continue;
      }
      const std::string* s = std::get_if<std::string>(&v);
      if (s == nullptr) throw DataError("schema mismatch: feature " + features_[f].name + " is not categorical");
      auto it = lookup_[f].find(*s);
      if (it == lookup_[f].end()) {
        all_seen = false;
        continue;
      }
      if (drop_first_) {
        if (it->second > 0) out[offsets_[f] + it->second - 1] = 1.0;
      } else {
        out[offsets_[f] + it->second] = 1.0;
      }
    }
    return all_seen;
  }

  Dataset encode(const RecordFrame& frame, std::span<const std::size_t> rows) const {
    Dataset data;
    data.cols = width_;
    data.x.assign(rows.size() * width_, 0.0);
    data.y.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Record& r = frame[rows[i]];
      if (!encode(r, std::span<double>(data.x.data() + i * width_, width_))) ++data.unseen_categories;
      data.y.push_back(r.outcome);
    }
    return data;
  }

 private:
  std::vector<FeatureSpec> features_;
  std::vector<std::vector<std::string>> levels_;
  bool drop_first_ = false;
  std::vector<std::map<std::string, std::size_t>> lookup_;
  std::vector<std::size_t> offsets_;
  std::size_t width_ = 0;
};

}  // namespace sveval
