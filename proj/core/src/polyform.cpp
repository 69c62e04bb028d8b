#include "operadkit/polyform.hpp"

#include <map>
#include <sstream>

namespace operadkit {

void PolyForm::trim() {
  while (!p_.empty() && p_.back().is_zero()) p_.pop_back();
  while (!q_.empty() && q_.back().is_zero()) q_.pop_back();
}

PolyForm PolyForm::monomial(int tpow, bool dt, Rat coeff) {
  PolyForm f;
  auto& tgt = dt ? f.q_ : f.p_;
  tgt.assign(tpow + 1, Rat(0));
  tgt[tpow] = std::move(coeff);
  f.trim();
  return f;
}

bool PolyForm::is_zero() const { return p_.empty() && q_.empty(); }

int PolyForm::degree() const {
  if (p_.empty() && q_.empty()) return 0;
  if (q_.empty()) return 0;
  if (p_.empty()) return 1;
  return -1;
}

PolyForm PolyForm::operator+(const PolyForm& o) const {
  PolyForm f;
  f.p_.resize(std::max(p_.size(), o.p_.size()), Rat(0));
  f.q_.resize(std::max(q_.size(), o.q_.size()), Rat(0));
  for (size_t k = 0; k < p_.size(); ++k) f.p_[k] += p_[k];
  for (size_t k = 0; k < o.p_.size(); ++k) f.p_[k] += o.p_[k];
  for (size_t k = 0; k < q_.size(); ++k) f.q_[k] += q_[k];
  for (size_t k = 0; k < o.q_.size(); ++k) f.q_[k] += o.q_[k];
  f.trim();
  return f;
}

PolyForm PolyForm::operator-(const PolyForm& o) const { return *this + Rat(-1) * o; }

PolyForm operator*(const Rat& c, const PolyForm& f) {
  PolyForm g = f;
  for (auto& v : g.p_) v *= c;
  for (auto& v : g.q_) v *= c;
  g.trim();
  return g;
}

PolyForm PolyForm::operator*(const PolyForm& o) const {
  PolyForm f;
  // p*p' part
  if (!p_.empty() && !o.p_.empty()) {
    f.p_.assign(p_.size() + o.p_.size() - 1, Rat(0));
    for (size_t a = 0; a < p_.size(); ++a)
      for (size_t b = 0; b < o.p_.size(); ++b) f.p_[a + b] += p_[a] * o.p_[b];
  }
  // p*q' dt + q dt * p' = (p q' + q p') dt ; dt*dt = 0
  size_t qlen = 0;
  if (!p_.empty() && !o.q_.empty()) qlen = std::max(qlen, p_.size() + o.q_.size() - 1);
  if (!q_.empty() && !o.p_.empty()) qlen = std::max(qlen, q_.size() + o.p_.size() - 1);
  f.q_.assign(qlen, Rat(0));
  for (size_t a = 0; a < p_.size(); ++a)
    for (size_t b = 0; b < o.q_.size(); ++b) f.q_[a + b] += p_[a] * o.q_[b];
  for (size_t a = 0; a < q_.size(); ++a)
    for (size_t b = 0; b < o.p_.size(); ++b) f.q_[a + b] += q_[a] * o.p_[b];
  f.trim();
  return f;
}

PolyForm PolyForm::d() const {
  PolyForm f;
  if (p_.size() > 1) {
    f.q_.assign(p_.size() - 1, Rat(0));
    for (size_t k = 1; k < p_.size(); ++k) f.q_[k - 1] = Rat(static_cast<long>(k)) * p_[k];
  }
  f.trim();
  return f;
}

Rat PolyForm::ev0() const { return p_.empty() ? Rat(0) : p_[0]; }

Rat PolyForm::ev1() const {
  Rat s;
  for (const auto& c : p_) s += c;
  return s;
}

PolyForm PolyForm::prim_projection() const {
  PolyForm f = *this;
  Rat at1 = ev1();
  if (!at1.is_zero()) {
    if (f.p_.size() < 2) f.p_.resize(2, Rat(0));
    f.p_[1] -= at1;
  }
  f.trim();
  return f;
}

std::vector<std::pair<std::pair<PolyForm, PolyForm>, Rat>> PolyForm::mstar(const PolyForm& f) {
  // tensor square with Koszul products, keyed by monomial pairs
  using Key = std::tuple<int, bool, int, bool>;
  std::map<Key, Rat> acc;
  auto add = [&](int a, bool da, int b, bool db, const Rat& c) {
    if (c.is_zero() || (da && db)) return;
    acc[{a, da, b, db}] += c;
  };
  auto mul_into = [&](const std::map<Key, Rat>& x, const std::map<Key, Rat>& y) {
    std::map<Key, Rat> out;
    for (const auto& [kx, cx] : x)
      for (const auto& [ky, cy] : y) {
        auto [a, da, b, db] = kx;
        auto [a2, da2, b2, db2] = ky;
        if ((da && da2) || (db && db2)) continue;
        // (u (x) v)(u' (x) v') = (-1)^{|v||u'|} uu' (x) vv'
        Rat sign((db && da2) ? -1 : 1);
        out[{a + a2, da || da2, b + b2, db || db2}] += cx * cy * sign;
      }
    return out;
  };

  std::map<Key, Rat> mt = {{{1, false, 0, false}, Rat(1)},
                           {{0, false, 1, false}, Rat(1)},
                           {{1, false, 1, false}, Rat(-1)}};
  // m*(dt) = dt (x) (1-t) + (1-t) (x) dt : the chain-map extension
  std::map<Key, Rat> mdt = {{{0, true, 0, false}, Rat(1)},
                            {{0, true, 1, false}, Rat(-1)},
                            {{0, false, 0, true}, Rat(1)},
                            {{1, false, 0, true}, Rat(-1)}};

  auto mt_pow = [&](int k) {
    std::map<Key, Rat> r = {{{0, false, 0, false}, Rat(1)}};
    for (int i = 0; i < k; ++i) r = mul_into(r, mt);
    return r;
  };
  const auto& p = f.p();
  const auto& q = f.q();
  for (size_t k = 0; k < p.size(); ++k) {
    if (p[k].is_zero()) continue;
    for (const auto& [key, c] : mt_pow(static_cast<int>(k))) {
      auto [a, da, b, db] = key;
      add(a, da, b, db, c * p[k]);
    }
  }
  for (size_t k = 0; k < q.size(); ++k) {
    if (q[k].is_zero()) continue;
    auto r = mul_into(mt_pow(static_cast<int>(k)), mdt);
    for (const auto& [key, c] : r) {
      auto [a, da, b, db] = key;
      add(a, da, b, db, c * q[k]);
    }
  }
  std::vector<std::pair<std::pair<PolyForm, PolyForm>, Rat>> out;
  for (const auto& [key, c] : acc) {
    if (c.is_zero()) continue;
    auto [a, da, b, db] = key;
    out.push_back({{monomial(a, da), monomial(b, db)}, c});
  }
  return out;
}

std::string PolyForm::str() const {
  std::ostringstream os;
  auto poly = [&](const std::vector<Rat>& cs) {
    std::string s;
    for (size_t k = 0; k < cs.size(); ++k) {
      if (cs[k].is_zero()) continue;
      if (!s.empty()) s += " + ";
      s += cs[k].str();
      if (k >= 1) s += "*t";
      if (k >= 2) s += "^" + std::to_string(k);
    }
    return s.empty() ? std::string("0") : s;
  };
  if (p_.empty() && q_.empty()) return "0";
  bool wrote = false;
  if (!p_.empty()) {
    os << poly(p_);
    wrote = true;
  }
  if (!q_.empty()) {
    if (wrote) os << " + ";
    os << "(" << poly(q_) << ") dt";
  }
  return os.str();
}

}  // namespace operadkit
