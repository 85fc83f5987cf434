#include "rateless/codebook_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "rateless/format.hpp"

namespace rateless {

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("codebook line " + std::to_string(line) + ": " + what), line_(line) {}

void save_codebook(std::ostream& out, const PermutationCode& code) {
  out << code.L() << '\n' << code.bits() << '\n';
  for (const cplx& p : code.constellation().points()) out << format_exact(p.real()) << ',' << format_exact(p.imag()) << '\n';
  for (const Permutation& perm : code.perms()) {
    for (std::size_t i = 0; i < perm.size(); ++i) out << (i ? " " : "") << perm[i];
    out << '\n';
  }
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(line_no_ + 1, std::string("unexpected end of file, expected ") + what);
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
  int line_no() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

template <typename T>
T parse_number(const std::string& token, int line, const char* what) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || token.empty()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + token + "'");
  }
  return value;
}

}  // namespace

PermutationCode load_codebook(std::istream& in) {
  LineReader reader(in);
  const std::string l_line = reader.next("L");
  const int L = parse_number<int>(l_line, reader.line_no(), "L");
  if (L < 1) throw ParseError(reader.line_no(), "L must be >= 1");
  const std::string bits_line = reader.next("bits");
  const int bits = parse_number<int>(bits_line, reader.line_no(), "bits");
  if (bits < 1 || bits > 8) throw ParseError(reader.line_no(), "bits must be in 1..8");

  const std::size_t n = std::size_t{1} << bits;
  std::vector<cplx> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string line = reader.next("constellation point");
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(reader.line_no(), "expected 're,im'");
    const double re = parse_number<double>(line.substr(0, comma), reader.line_no(), "real part");
    const double im = parse_number<double>(line.substr(comma + 1), reader.line_no(), "imaginary part");
    points.emplace_back(re, im);
  }
  const int points_end = reader.line_no();

  std::vector<Permutation> perms;
  for (int k = 0; k < L; ++k) {
    const std::string row_text = reader.next("permutation");
    std::istringstream row(row_text);
    Permutation perm;
    std::string token;
    while (row >> token) perm.push_back(parse_number<std::uint32_t>(token, reader.line_no(), "permutation index"));
    if (perm.size() != n) throw ParseError(reader.line_no(), "permutation needs " + std::to_string(n) + " entries");
    perms.push_back(std::move(perm));
  }
  std::string extra;
  while (std::getline(in, extra)) {
    if (extra.find_first_not_of(" \t\r") != std::string::npos) throw ParseError(reader.line_no() + 1, "trailing content");
  }

  try {
    Constellation constellation = Constellation::from_points(bits, std::move(points));
    try {
      return PermutationCode(std::move(constellation), std::move(perms));
    } catch (const DomainError& e) {
      throw ParseError(points_end + 1, e.what());
    }
  } catch (const DomainError& e) {
    throw ParseError(3, e.what());
  }
}

std::string codebook_to_string(const PermutationCode& code) {
  std::ostringstream out;
  save_codebook(out, code);
  return out.str();
}

PermutationCode codebook_from_string(const std::string& text) {
  std::istringstream in(text);
  return load_codebook(in);
}

}  // namespace rateless
