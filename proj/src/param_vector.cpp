#include "fedgnn/param_vector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fedgnn/errors.hpp"

namespace fedgnn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

ParamLayout::ParamLayout(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  offsets_.reserve(segments_.size());
  for (const auto& s : segments_) {
    offsets_.push_back(total_);
    total_ += s.size();
  }
}

std::size_t ParamLayout::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < segments_.size(); ++i)
    if (segments_[i].name == name) return i;
  throw ContractError("no parameter segment named '" + name + "'");
}

ParamVector::ParamVector(LayoutPtr layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (!layout_) throw ContractError("parameter vector without layout");
  if (values_.size() != layout_->total_size())
    throw ContractError("parameter vector has " +
                        std::to_string(values_.size()) +
                        " values but its layout needs " +
                        std::to_string(layout_->total_size()));
}

ParamVector ParamVector::zeros(LayoutPtr layout) {
  const std::size_t n = layout->total_size();
  return ParamVector(std::move(layout), std::vector<double>(n, 0.0));
}

std::span<const double> ParamVector::segment(std::size_t index) const {
  return {values_.data() + layout_->offset(index),
          layout_->segments()[index].size()};
}

std::span<const double> ParamVector::segment(const std::string& name) const {
  return segment(layout_->index_of(name));
}

bool ParamVector::same_layout(const ParamVector& other) const noexcept {
  if (layout_ == other.layout_) return true;
  if (!layout_ || !other.layout_) return false;
  return *layout_ == *other.layout_;
}

void ParamVector::require_same_layout(const ParamVector& other,
                                      const char* what) const {
  if (!same_layout(other))
    throw ContractError(std::string(what) + ": parameter layouts differ");
}

std::uint64_t ParamVector::checksum() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values_) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

namespace {

template <typename Op>
ParamVector zip(const ParamVector& a, const ParamVector& b, const char* what,
                Op op) {
  a.require_same_layout(b, what);
  std::vector<double> out(a.size());
  const auto x = a.values();
  const auto y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(x[i], y[i]);
  return ParamVector(a.layout(), std::move(out));
}

}  // namespace

ParamVector add(const ParamVector& a, const ParamVector& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}

ParamVector sub(const ParamVector& a, const ParamVector& b) {
  return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

ParamVector scale(const ParamVector& a, double c) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= c;
  return ParamVector(a.layout(), std::move(out));
}

double dot(const ParamVector& a, const ParamVector& b) {
  a.require_same_layout(b, "dot");
  const auto x = a.values();
  const auto y = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double l2(const ParamVector& a) { return std::sqrt(dot(a, a)); }

double cosine(const ParamVector& a, const ParamVector& b) {
  a.require_same_layout(b, "cosine");
  const double na = l2(a);
  const double nb = l2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

void write_params(std::ostream& out, const ParamVector& p) {
  out << "FEDGNN-PARAMS 1\n" << p.layout()->segments().size() << '\n';
  for (const auto& s : p.layout()->segments())
    out << s.name << ' ' << s.rows << ' ' << s.cols << '\n';
  out.write(reinterpret_cast<const char*>(p.values().data()),
            static_cast<std::streamsize>(p.size() * sizeof(double)));
  if (!out) throw ContractError("failed writing parameter checkpoint");
}

ParamVector read_params(std::istream& in) {
  std::string magic, version;
  in >> magic >> version;
  if (magic != "FEDGNN-PARAMS" || version != "1")
    throw ParseError("checkpoint", 1, "bad checkpoint header");
  std::size_t n = 0;
  if (!(in >> n)) throw ParseError("checkpoint", 2, "missing segment count");
  std::vector<Segment> segs(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(in >> segs[i].name >> segs[i].rows >> segs[i].cols))
      throw ParseError("checkpoint", 3 + i, "bad segment line");
  in.get();  // newline before the payload
  auto layout = std::make_shared<const ParamLayout>(std::move(segs));
  std::vector<double> values(layout->total_size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != values.size() * sizeof(double))
    throw ParseError("checkpoint", 0, "truncated payload");
  return ParamVector(std::move(layout), std::move(values));
}

void save_params(const std::filesystem::path& path, const ParamVector& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot create " + path.string());
  write_params(out, p);
}

ParamVector load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open checkpoint");
  return read_params(in);
}

}  // namespace fedgnn
