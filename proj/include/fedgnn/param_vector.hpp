#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fedgnn {

struct Segment {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const noexcept { return rows * cols; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Ordered (name, shape) list describing how a flat vector splits into
// named row-major matrices.
class ParamLayout {
 public:
  explicit ParamLayout(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::size_t total_size() const noexcept { return total_; }
  std::size_t offset(std::size_t segment) const { return offsets_.at(segment); }
  // Index of the named segment; throws ContractError if absent.
  std::size_t index_of(const std::string& name) const;

  friend bool operator==(const ParamLayout& a, const ParamLayout& b) {
    return a.segments_ == b.segments_;
  }

 private:
  std::vector<Segment> segments_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

using LayoutPtr = std::shared_ptr<const ParamLayout>;

// Flat view of all model parameters. Values are immutable through the
// public interface; algebra returns new vectors.
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(LayoutPtr layout, std::vector<double> values);
  static ParamVector zeros(LayoutPtr layout);

  const LayoutPtr& layout() const noexcept { return layout_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> segment(std::size_t index) const;
  std::span<const double> segment(const std::string& name) const;

  bool same_layout(const ParamVector& other) const noexcept;
  // Throws ContractError naming `what` when layouts differ.
  void require_same_layout(const ParamVector& other, const char* what) const;

  // FNV-1a over the little-endian bytes of the values.
  std::uint64_t checksum() const noexcept;

  friend bool operator==(const ParamVector& a, const ParamVector& b) {
    return a.same_layout(b) && a.values_ == b.values_;
  }

 private:
  LayoutPtr layout_;
  std::vector<double> values_;
};

ParamVector add(const ParamVector& a, const ParamVector& b);
ParamVector sub(const ParamVector& a, const ParamVector& b);
ParamVector scale(const ParamVector& a, double c);
double dot(const ParamVector& a, const ParamVector& b);
double l2(const ParamVector& a);
// In [-1, 1]; 0 when either vector has zero norm.
double cosine(const ParamVector& a, const ParamVector& b);

// Checkpoint format: "FEDGNN-PARAMS 1" header line, a segment count line,
// one "name rows cols" line per segment, then the raw little-endian
// IEEE-754 doubles.
void write_params(std::ostream& out, const ParamVector& p);
ParamVector read_params(std::istream& in);
void save_params(const std::filesystem::path& path, const ParamVector& p);
ParamVector load_params(const std::filesystem::path& path);

}  // namespace fedgnn
