#pragma once

// Plain-text codebook: line 1 `L`, line 2 `bits`, then 2^bits lines `re,im`
// and L lines of space-separated permutation indices.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "rateless/permutation_code.hpp"

namespace rateless {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

void save_codebook(std::ostream& out, const PermutationCode& code);
PermutationCode load_codebook(std::istream& in);

std::string codebook_to_string(const PermutationCode& code);
PermutationCode codebook_from_string(const std::string& text);

}  // namespace rateless
