#include "srlpm/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

namespace srlpm {

namespace {

constexpr std::size_t kMagicSize = 5;
constexpr char kGraphMagic[] = "SRLG1";
constexpr char kDenseMagic[] = "SRDS1";
constexpr char kFactorMagic[] = "SRLF1";

template <typename T>
T byteswap(T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  std::reverse(bytes.begin(), bytes.end());
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

template <typename T>
void put(std::ostream& out, T value) {
  if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError(std::string("truncated file while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
  return value;
}

void put_doubles(std::ostream& out, const double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count; ++i) put(out, data[i]);
  }
}

void get_doubles(std::istream& in, double* data, std::size_t count,
                 const char* what) {
  if (!in.read(reinterpret_cast<char*>(data),
               static_cast<std::streamsize>(count * sizeof(double)))) {
    throw ParseError(std::string("truncated file while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < count; ++i) data[i] = byteswap(data[i]);
  }
}

// Row-major dump of a column-major matrix.
void put_row_major(std::ostream& out, const Matrix& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      rm = m;
  put_doubles(out, rm.data(), static_cast<std::size_t>(rm.size()));
}

Matrix get_row_major(std::istream& in, Index rows, Index cols,
                     const char* what) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
      rows, cols);
  get_doubles(in, rm.data(), static_cast<std::size_t>(rm.size()), what);
  return rm;
}

void expect_magic(std::istream& in, const char* magic) {
  std::array<char, kMagicSize> buf{};
  if (!in.read(buf.data(), kMagicSize) ||
      std::memcmp(buf.data(), magic, kMagicSize) != 0) {
    throw ParseError(std::string("bad magic, expected ") + magic);
  }
}

Index get_size(std::istream& in, const char* what) {
  const auto v = get<std::uint64_t>(in, what);
  if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()) *
              8ULL) {
    throw ParseError(std::string("implausible ") + what + " in header");
  }
  return static_cast<Index>(v);
}

void expect_end(std::istream& in) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("trailing bytes after payload");
  }
}

}  // namespace

void write_file_atomic(const std::string& path,
                       const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = fs::path(path + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    try {
      writer(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void write_graph(std::ostream& out, const NormalizedAdjacency& a) {
  const SparseMatrix& m = a.matrix();
  out.write(kGraphMagic, kMagicSize);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(a.n()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.nonZeros()));
  for (Index j = 0; j <= m.outerSize(); ++j) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.outerIndexPtr()[j]));
  }
  for (Index k = 0; k < m.nonZeros(); ++k) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.innerIndexPtr()[k]));
  }
  put_doubles(out, m.valuePtr(), static_cast<std::size_t>(m.nonZeros()));
}

NormalizedAdjacency read_graph(std::istream& in) {
  expect_magic(in, kGraphMagic);
  const Index n = get_size(in, "n");
  const Index nnz = get_size(in, "nnz");
  std::vector<std::int64_t> col_ptr(static_cast<std::size_t>(n) + 1);
  for (auto& p : col_ptr) p = static_cast<std::int64_t>(get<std::uint64_t>(in, "col_ptr"));
  std::vector<std::int64_t> row_idx(static_cast<std::size_t>(nnz));
  for (auto& r : row_idx) r = static_cast<std::int64_t>(get<std::uint64_t>(in, "row_idx"));
  std::vector<double> val(static_cast<std::size_t>(nnz));
  get_doubles(in, val.data(), val.size(), "values");
  expect_end(in);

  if (col_ptr.front() != 0 || col_ptr.back() != nnz) {
    throw ParseError("graph: column pointers inconsistent with nnz");
  }
  SparseMatrix m(n, n);
  m.reserve(nnz);
  std::vector<Index> degree(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j) {
    m.startVec(j);
    const auto begin = col_ptr[static_cast<std::size_t>(j)];
    const auto end = col_ptr[static_cast<std::size_t>(j) + 1];
    if (end < begin) throw ParseError("graph: decreasing column pointers");
    for (auto k = begin; k < end; ++k) {
      const auto row = row_idx[static_cast<std::size_t>(k)];
      if (row < 0 || row >= n || (k > begin && row <= row_idx[static_cast<std::size_t>(k) - 1])) {
        throw ParseError("graph: row indices out of range or unsorted");
      }
      m.insertBack(row, j) = val[static_cast<std::size_t>(k)];
    }
    degree[static_cast<std::size_t>(j)] = end - begin;
  }
  m.finalize();
  return NormalizedAdjacency(std::move(m), std::move(degree));
}

void write_dense(std::ostream& out, const Matrix& s, double c) {
  detail::require_shape(s.rows() == s.cols(), "dense dump: matrix must be square");
  out.write(kDenseMagic, kMagicSize);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(s.rows()));
  put<double>(out, c);
  // Row-major, streamed one row at a time.
  std::vector<double> row(static_cast<std::size_t>(s.cols()));
  for (Index i = 0; i < s.rows(); ++i) {
    for (Index j = 0; j < s.cols(); ++j) row[static_cast<std::size_t>(j)] = s(i, j);
    put_doubles(out, row.data(), row.size());
  }
}

DenseDump read_dense(std::istream& in) {
  expect_magic(in, kDenseMagic);
  const Index n = get_size(in, "n");
  DenseDump d;
  d.c = get<double>(in, "c");
  d.values.resize(n, n);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    get_doubles(in, row.data(), row.size(), "dense values");
    for (Index j = 0; j < n; ++j) d.values(i, j) = row[static_cast<std::size_t>(j)];
  }
  expect_end(in);
  return d;
}

DenseDump load_dense(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dense dump '" + path + "'");
  return read_dense(in);
}

Index FactorFile::n() const {
  return std::visit([](const auto& f) { return f.n(); }, factor);
}

Index FactorFile::rank() const {
  return std::visit([](const auto& f) { return f.rank(); }, factor);
}

Approximation FactorFile::approximation() const {
  return std::visit([](const auto& f) { return Approximation(f); }, factor);
}

void write_factors(std::ostream& out, const AnyFactor& factor, double c) {
  out.write(kFactorMagic, kMagicSize);
  const auto kind = static_cast<std::uint8_t>(factor.index());
  out.put(static_cast<char>(kind));
  std::visit(
      [&](const auto& f) {
        put<std::uint64_t>(out, static_cast<std::uint64_t>(f.n()));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(f.rank()));
        put<double>(out, c);
      },
      factor);
  if (const auto* p = std::get_if<FactorPair>(&factor)) {
    put_row_major(out, p->u);
    put_row_major(out, p->v);
  } else if (const auto* s = std::get_if<SymmetricFactor>(&factor)) {
    put_row_major(out, s->u);
  } else {
    const auto& m = std::get<SpectralFactor>(factor);
    put_row_major(out, m.left);
    put_doubles(out, m.sigma.data(), static_cast<std::size_t>(m.sigma.size()));
    put_row_major(out, m.right);
  }
}

FactorFile read_factors(std::istream& in) {
  expect_magic(in, kFactorMagic);
  const int kind = in.get();
  if (kind < 0 || kind > 2) throw ParseError("factor file: unknown kind byte");
  const Index n = get_size(in, "n");
  const Index r = get_size(in, "r");
  FactorFile file;
  file.c = get<double>(in, "c");
  switch (kind) {
    case 0: {
      FactorPair p;
      p.u = get_row_major(in, n, r, "U");
      p.v = get_row_major(in, n, r, "V");
      file.factor = std::move(p);
      break;
    }
    case 1:
      file.factor = SymmetricFactor{get_row_major(in, n, r, "U")};
      break;
    default: {
      SpectralFactor m;
      m.left = get_row_major(in, n, r, "Q_left");
      m.sigma.resize(r);
      get_doubles(in, m.sigma.data(), static_cast<std::size_t>(r), "sigma");
      m.right = get_row_major(in, n, r, "Q_right");
      file.factor = std::move(m);
      break;
    }
  }
  expect_end(in);
  return file;
}

FactorFile load_factors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open factor file '" + path + "'");
  return read_factors(in);
}

}  // namespace srlpm
