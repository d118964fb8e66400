#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kvstream/error.hpp"
#include "kvstream/instances.hpp"

// Text format, one record per line:
//
//   kvstream-instance 1
//   kind <name>
//   n <int>  d <int>  w <int>          (each on its own line)
//   eps <real>  eta <real>  C <real>  seed <uint64>
//   planted <int | ->
//   x <rows> <cols> | x -
//   <rows lines of '0'/'1' characters>
//   stream <n> <d>
//   q <d reals>
//   k <d reals>
//   v <d reals>                        (q/k/v repeated n times)
//
// Reals use the shortest round-trip representation, so write -> read is
// bit-exact.

namespace kvstream {

namespace io_detail {

inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline void write_vector(std::ostream& os, char tag, const Vector& v) {
  os << tag;
  char buf[32];
  for (double c : v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, c);
    os << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
  }
  os << '\n';
}

[[noreturn]] inline void malformed(const std::string& what) {
  throw ParameterError("instance file: " + what);
}

class Reader {
 public:
  explicit Reader(std::istream& is) : text_(std::istreambuf_iterator<char>(is), {}) {}

  std::string_view word() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    if (start == pos_) malformed("unexpected end of input");
    return std::string_view(text_).substr(start, pos_ - start);
  }

  void expect(std::string_view w) {
    const auto got = word();
    if (got != w) malformed("expected '" + std::string(w) + "', got '" + std::string(got) + "'");
  }

  template <typename T>
  T number() {
    const auto w = word();
    T value{};
    const auto res = std::from_chars(w.data(), w.data() + w.size(), value);
    if (res.ec != std::errc{} || res.ptr != w.data() + w.size()) {
      malformed("bad number '" + std::string(w) + "'");
    }
    return value;
  }

  template <typename T>
  T keyed(std::string_view key) {
    expect(key);
    return number<T>();
  }

  bool at_end() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    return pos_ == text_.size();
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; }

  std::string text_;
  std::size_t pos_ = 0;
};

inline Vector read_vector(Reader& r, char tag, std::size_t d) {
  r.expect(std::string_view(&tag, 1));
  std::vector<double> v(d);
  for (double& c : v) c = r.number<double>();
  return Vector(std::move(v));
}

}  // namespace io_detail

inline void write_instance(std::ostream& os, const HardInstance& inst) {
  using io_detail::format_double;
  os << "kvstream-instance 1\n";
  os << "kind " << kind_name(inst.kind) << '\n';
  os << "n " << inst.n << '\n' << "d " << inst.d << '\n' << "w " << inst.window << '\n';
  os << "eps " << format_double(inst.eps) << '\n';
  os << "eta " << format_double(inst.eta) << '\n';
  os << "C " << format_double(inst.C) << '\n';
  os << "seed " << inst.seed << '\n';
  os << "planted ";
  if (inst.planted_index) os << *inst.planted_index; else os << '-';
  os << '\n';
  if (inst.x) {
    os << "x " << inst.x->rows() << ' ' << inst.x->cols() << '\n';
    std::string line(inst.x->cols(), '0');
    for (std::size_t r = 0; r < inst.x->rows(); ++r) {
      for (std::size_t c = 0; c < inst.x->cols(); ++c) line[c] = (*inst.x)(r, c) ? '1' : '0';
      os << line << '\n';
    }
  } else {
    os << "x -\n";
  }
  os << "stream " << inst.stream.size() << ' ' << inst.d << '\n';
  for (const auto& t : inst.stream) {
    io_detail::write_vector(os, 'q', t.q);
    io_detail::write_vector(os, 'k', t.k);
    io_detail::write_vector(os, 'v', t.v);
  }
}

inline HardInstance read_instance(std::istream& is) {
  io_detail::Reader r(is);
  r.expect("kvstream-instance");
  if (r.number<int>() != 1) io_detail::malformed("unsupported version");
  HardInstance inst;
  r.expect("kind");
  inst.kind = parse_kind(r.word());
  inst.n = r.keyed<std::size_t>("n");
  inst.d = r.keyed<std::size_t>("d");
  inst.window = r.keyed<std::size_t>("w");
  inst.eps = r.keyed<double>("eps");
  inst.eta = r.keyed<double>("eta");
  inst.C = r.keyed<double>("C");
  inst.seed = r.keyed<std::uint64_t>("seed");
  r.expect("planted");
  if (const auto w = r.word(); w != "-") {
    std::size_t p = 0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), p);
    if (res.ec != std::errc{} || res.ptr != w.data() + w.size()) io_detail::malformed("bad planted index");
    inst.planted_index = p;
  }
  r.expect("x");
  if (const auto w = r.word(); w != "-") {
    std::size_t rows = 0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), rows);
    if (res.ec != std::errc{} || res.ptr != w.data() + w.size()) io_detail::malformed("bad x shape");
    const auto cols = r.number<std::size_t>();
    BitMatrix x(rows, cols);
    for (std::size_t row = 0; row < rows; ++row) {
      const auto bits = r.word();
      if (bits.size() != cols) io_detail::malformed("x row has wrong length");
      for (std::size_t c = 0; c < cols; ++c) {
        if (bits[c] != '0' && bits[c] != '1') io_detail::malformed("x row has a non-bit character");
        x.set(row, c, bits[c] == '1');
      }
    }
    inst.x = std::move(x);
  }
  r.expect("stream");
  const auto count = r.number<std::size_t>();
  const auto d = r.number<std::size_t>();
  if (count != inst.n || d != inst.d) io_detail::malformed("stream shape disagrees with header");
  inst.stream.reserve(count);
  for (std::size_t l = 0; l < count; ++l) {
    Vector q = io_detail::read_vector(r, 'q', d);
    Vector k = io_detail::read_vector(r, 'k', d);
    Vector v = io_detail::read_vector(r, 'v', d);
    inst.stream.emplace_back(std::move(q), std::move(k), std::move(v));
  }
  if (!r.at_end()) io_detail::malformed("trailing content");
  return inst;
}

inline std::string instance_to_string(const HardInstance& inst) {
  std::ostringstream os;
  write_instance(os, inst);
  return os.str();
}

inline HardInstance instance_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_instance(is);
}

inline void save_instance(const std::string& path, const HardInstance& inst) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParameterError("cannot open '" + path + "' for writing");
  write_instance(os, inst);
  if (!os) throw ParameterError("failed writing '" + path + "'");
}

inline HardInstance load_instance(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParameterError("cannot open '" + path + "'");
  return read_instance(is);
}

}  // namespace kvstream
