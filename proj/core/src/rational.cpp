#include "operadkit/rational.hpp"

#include <ostream>
#include <stdexcept>

namespace operadkit {

Rat Rat::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  mpq_class v;
  if (v.set_str(text, 10) != 0)
    throw std::invalid_argument("malformed rational literal: " + text);
  v.canonicalize();
  if (v.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
  return Rat(v);
}

Rat& Rat::operator/=(const Rat& o) {
  if (o.is_zero()) throw std::domain_error("division by zero");
  v_ /= o.v_;
  return *this;
}

std::string Rat::str() const {
  if (v_.get_den() == 1) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

}  // namespace operadkit
