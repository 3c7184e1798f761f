#include "irkm/data_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace irkm {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::optional<double> parse_double(const std::string& field) {
  std::size_t b = 0;
  std::size_t e = field.size();
  while (b < e && std::isspace(static_cast<unsigned char>(field[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(field[e - 1]))) --e;
  if (b == e) return std::nullopt;
  double v = 0.0;
  const char* first = field.data() + b;
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, field.data() + e, v);
  if (res.ec != std::errc() || res.ptr != field.data() + e) return std::nullopt;
  return v;
}

void normalize_columns(Matrix& x, Normalization how) {
  if (how == Normalization::none || x.rows() == 0) return;
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    auto col = x.col(j);
    if (how == Normalization::zscore) {
      const double mean = col.sum() / n;
      col.array() -= mean;
      double sd = std::sqrt(col.squaredNorm() / n);
      if (sd < 1e-12) sd = 1.0;
      col /= sd;
    } else {
      const double lo = col.minCoeff();
      const double hi = col.maxCoeff();
      if (hi - lo <= 0.0) {
        col.setZero();
      } else {
        col = ((col.array() - lo) * (2.0 / (hi - lo)) - 1.0).matrix();
      }
    }
  }
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(splitmix64(splitmix64(seed) ^ splitmix64(stream_id ^ 0x5851f42d4c957f2dULL))) {}

RngStream::result_type RngStream::operator()() {
  return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * (counter_++));
}

RngStream substream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
  return RngStream(seed, (static_cast<std::uint64_t>(purpose) << 48) ^ index);
}

void TargetSpec::validate() const {
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma", "must be >= 0");
  if (rotation) {
    const Matrix& u = *rotation;
    if (u.rows() != f.dim() || u.cols() != f.dim()) {
      throw DimensionMismatch("TargetSpec: rotation must be d x d");
    }
    const double err = (u.transpose() * u - Matrix::Identity(u.rows(), u.cols())).norm();
    if (err > 1e-10) throw ConfigError("rotation", "matrix is not orthogonal");
  }
}

Matrix sample_hypercube(Eigen::Index n, Eigen::Index d, RngStream& rng) {
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = (rng() >> 63) ? 1.0 : -1.0;
  }
  return x;
}

Matrix sample_gaussian(Eigen::Index n, Eigen::Index d, RngStream& rng) {
  std::normal_distribution<double> normal;
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = normal(rng);
  }
  return x;
}

Matrix sample(Distribution dist, Eigen::Index n, Eigen::Index d, RngStream& rng) {
  return dist == Distribution::hypercube ? sample_hypercube(n, d, rng) : sample_gaussian(n, d, rng);
}

Matrix random_rotation(Eigen::Index d, RngStream& rng) {
  const Matrix g = sample_gaussian(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Vector target_values(const TargetSpec& target, const Matrix& x) {
  if (x.cols() != target.f.dim()) throw DimensionMismatch("label: input columns != target dimension");
  if (target.rotation) return eval_fourier(target.f, Matrix(x * target.rotation->transpose()));
  return eval_fourier(target.f, x);
}

Vector label(const TargetSpec& target, const Matrix& x, RngStream& rng) {
  Vector y = target_values(target, x);
  if (target.noise_sigma > 0.0) {
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += target.noise_sigma * normal(rng);
  }
  return y;
}

Vector target_gradient(const TargetSpec& target, const Vector& x) {
  if (!target.rotation) return gradient_fourier(target.f, x);
  const Matrix& u = *target.rotation;
  return u.transpose() * gradient_fourier(target.f, Vector(u * x));
}

SymmetricMatrix target_agop(const TargetSpec& target, const Matrix& x) {
  const Eigen::Index d = target.f.dim();
  if (x.cols() != d) throw DimensionMismatch("target_agop: input columns != target dimension");
  if (x.rows() == 0) throw DimensionMismatch("target_agop: no samples");
  Matrix grads(x.rows(), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    grads.row(i) = target_gradient(target, Vector(x.row(i).transpose())).transpose();
  }
  return SymmetricMatrix(grads.transpose() * grads / static_cast<double>(x.rows()));
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw ParseError("stray quote inside unquoted field", line, row.size() + 1);
        quoted = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        rows.push_back(std::move(row));
        row.clear();
        ++line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line, row.size() + 1);
  if (field_started || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  if (!std::filesystem::exists(path)) throw FileNotFound("load_csv: no such file: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("load_csv: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);

  auto rows = parse_csv(text);
  if (rows.empty()) throw ParseError("missing header row", 1, 1);
  const auto& header = rows.front();
  auto column_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    throw MissingColumn("load_csv: no column named '" + name + "'");
  };
  const std::size_t label_col = column_of(schema.label_column);
  std::vector<std::size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != label_col) feature_cols.push_back(c);
    }
  } else {
    for (const auto& name : schema.feature_columns) feature_cols.push_back(column_of(name));
  }

  // Header is row 1 in error messages; data rows follow.
  std::vector<std::size_t> data_rows;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() == 1 && rows[r][0].empty()) continue;  // blank line
    data_rows.push_back(r);
  }
  Dataset ds;
  ds.x.resize(static_cast<Eigen::Index>(data_rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
  ds.y.resize(static_cast<Eigen::Index>(data_rows.size()));
  ds.source = "csv:" + path;
  for (std::size_t i = 0; i < data_rows.size(); ++i) {
    const auto& row = rows[data_rows[i]];
    if (row.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(row.size()),
                       data_rows[i] + 1, std::min(row.size(), header.size()) + 1);
    }
    auto cell = [&](std::size_t c) {
      const auto v = parse_double(row[c]);
      if (!v) throw ParseError("malformed number '" + row[c] + "'", data_rows[i] + 1, c + 1);
      return *v;
    };
    ds.y(static_cast<Eigen::Index>(i)) = cell(label_col);
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cell(feature_cols[k]);
    }
  }
  normalize_columns(ds.x, schema.normalization);
  return ds;
}

SyntheticSource::SyntheticSource(Distribution dist, TargetSpec target, Eigen::Index n,
                                 std::uint64_t seed)
    : dist_(dist), target_(std::move(target)), n_(n), seed_(seed) {
  target_.validate();
  if (n_ < 1) throw EmptyDataSource("SyntheticSource: batch size must be >= 1");
}

Dataset SyntheticSource::draw(std::uint64_t step) {
  RngStream inputs = substream(seed_, StreamPurpose::train_inputs, step);
  RngStream noise = substream(seed_, StreamPurpose::train_noise, step);
  Dataset ds;
  ds.x = sample(dist_, n_, target_.f.dim(), inputs);
  ds.y = label(target_, ds.x, noise);
  ds.source = "synthetic";
  return ds;
}

FixedSource::FixedSource(Dataset data) : data_(std::move(data)) {
  if (data_.size() == 0) throw EmptyDataSource("FixedSource: dataset is empty");
}

Dataset FixedSource::draw(std::uint64_t) { return data_; }

PoolSource::PoolSource(Dataset pool, Eigen::Index n) : pool_(std::move(pool)), n_(n) {
  if (pool_.size() == 0 || n_ < 1) throw EmptyDataSource("PoolSource: empty pool or batch");
}

Dataset PoolSource::draw(std::uint64_t step) {
  Dataset ds;
  ds.x.resize(n_, pool_.dim());
  ds.y.resize(n_);
  ds.source = pool_.source;
  const Eigen::Index start = static_cast<Eigen::Index>(((step > 0 ? step - 1 : 0) * static_cast<std::uint64_t>(n_)) %
                                                       static_cast<std::uint64_t>(pool_.size()));
  for (Eigen::Index i = 0; i < n_; ++i) {
    const Eigen::Index r = (start + i) % pool_.size();
    ds.x.row(i) = pool_.x.row(r);
    ds.y(i) = pool_.y(r);
  }
  return ds;
}

Dataset make_test_set(Distribution dist, const TargetSpec& target, Eigen::Index m, std::uint64_t seed) {
  RngStream inputs = substream(seed, StreamPurpose::test_inputs);
  RngStream noise = substream(seed, StreamPurpose::test_noise);
  Dataset ds;
  ds.x = sample(dist, m, target.f.dim(), inputs);
  ds.y = label(target, ds.x, noise);
  ds.source = "synthetic-test";
  return ds;
}

}  // namespace irkm
