#include "operadkit/leveled_tree.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace operadkit {

int LeveledTree::level_size(int i) const {
  if (i == 0) return 1;
  return static_cast<int>(maps.at(i - 1).size());
}

int LeveledTree::arity(int level, int pos) const {
  int count = 0;
  for (int v : maps.at(level))
    if (v == pos) ++count;
  return count;
}

LeveledTree LeveledTree::corolla(int n) {
  LeveledTree t;
  t.labels.resize(n);
  std::iota(t.labels.begin(), t.labels.end(), 1);
  t.maps.push_back(std::vector<int>(n, 0));
  return t;
}

std::string LeveledTree::encode() const { return to_text(*this); }
std::string SectionedTree::encode() const { return to_text(*this); }

namespace {

bool monotone_surjection(const std::vector<int>& m, int target_size) {
  if (m.empty()) return target_size == 0;
  if (m.front() != 0) return false;
  for (size_t q = 1; q < m.size(); ++q) {
    int step = m[q] - m[q - 1];
    if (step < 0 || step > 1) return false;
  }
  return m.back() == target_size - 1;
}

void validate_chain(const LeveledTree& t, int section, ValidationReport& rep) {
  const int h = t.height();
  if (h < 0) {
    rep.fail("empty chain");
    return;
  }
  if (t.labels.size() != t.maps[h].size())
    rep.fail("label count differs from leaf line size");
  std::set<int> lab(t.labels.begin(), t.labels.end());
  if (lab.size() != t.labels.size() ||
      (!t.labels.empty() && (*lab.begin() != 1 || *lab.rbegin() != t.leaf_count())))
    rep.fail("leaf labeling is not a permutation of 1..n");
  for (int j = 0; j <= h; ++j) {
    if (!monotone_surjection(t.maps[j], t.level_size(j))) {
      rep.fail("t_" + std::to_string(j) + " is not an increasing surjection");
      return;
    }
  }
  for (int j = 0; j <= h; ++j) {
    int upper = (j == h) ? t.leaf_count() : t.level_size(j + 1);
    bool strict = upper > t.level_size(j);
    if (!strict && j != section)
      rep.fail("level " + std::to_string(j) +
               " does not grow (t_" + std::to_string(j) + " bijective away from the section)");
  }
}

}  // namespace

ValidationReport validate_leveled(const LeveledTree& t) {
  ValidationReport rep;
  validate_chain(t, -1, rep);
  return rep;
}

ValidationReport validate_sectioned(const SectionedTree& t) {
  ValidationReport rep;
  if (t.section < 0 || t.section > t.tree.height()) {
    rep.fail("section index out of range");
    return rep;
  }
  validate_chain(t.tree, t.section, rep);
  return rep;
}

// ---- serialization ----

namespace {

std::string ints(const std::vector<int>& v) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  os << "]";
  return os.str();
}

std::vector<int> parse_ints(const std::string& s, size_t& pos) {
  std::vector<int> out;
  if (s.at(pos) != '[') throw std::invalid_argument("expected [");
  ++pos;
  while (pos < s.size() && s[pos] != ']') {
    if (s[pos] == ',') {
      ++pos;
      continue;
    }
    size_t next;
    out.push_back(std::stoi(s.substr(pos), &next));
    pos += next;
  }
  if (pos >= s.size()) throw std::invalid_argument("unterminated list");
  ++pos;
  return out;
}

}  // namespace

std::string to_text(const LeveledTree& t) {
  std::ostringstream os;
  os << "levels=[";
  for (int i = t.height(); i >= 0; --i) {
    os << t.level_size(i);
    if (i) os << ",";
  }
  os << "]; maps=[";
  for (int j = t.height(); j >= 0; --j) {
    os << ints(t.maps[j]);
    if (j) os << ",";
  }
  os << "]; labels=" << ints(t.labels);
  return os.str();
}

std::string to_text(const SectionedTree& t) {
  return to_text(t.tree) + "; section=" + std::to_string(t.section);
}

namespace {

LeveledTree chain_from_text(const std::string& s, int* section) {
  auto need = [&](const std::string& key) {
    auto at = s.find(key);
    if (at == std::string::npos) throw std::invalid_argument("missing " + key);
    return at + key.size();
  };
  size_t pos = need("levels=");
  std::vector<int> levels = parse_ints(s, pos);
  pos = need("maps=");
  if (s.at(pos) != '[') throw std::invalid_argument("expected [ after maps=");
  ++pos;
  std::vector<std::vector<int>> maps_top_down;
  while (pos < s.size() && s[pos] != ']') {
    if (s[pos] == ',') {
      ++pos;
      continue;
    }
    maps_top_down.push_back(parse_ints(s, pos));
  }
  ++pos;
  pos = need("labels=");
  std::vector<int> labels = parse_ints(s, pos);

  LeveledTree t;
  t.labels = labels;
  t.maps.assign(maps_top_down.rbegin(), maps_top_down.rend());
  if (static_cast<int>(levels.size()) != t.height() + 1)
    throw std::invalid_argument("levels list does not match the maps");
  for (int i = 0; i <= t.height(); ++i)
    if (levels[t.height() - i] != t.level_size(i))
      throw std::invalid_argument("levels list inconsistent with maps");
  if (section) {
    auto at = s.find("section=");
    if (at == std::string::npos) throw std::invalid_argument("missing section");
    *section = std::stoi(s.substr(at + 8));
  }
  return t;
}

}  // namespace

LeveledTree leveled_from_text(const std::string& s) { return chain_from_text(s, nullptr); }

SectionedTree sectioned_from_text(const std::string& s) {
  SectionedTree t;
  t.tree = chain_from_text(s, &t.section);
  return t;
}

std::string to_json(const LeveledTree& t) {
  nlohmann::ordered_json j;
  for (int i = t.height(); i >= 0; --i) j["levels"].push_back(t.level_size(i));
  for (int k = t.height(); k >= 0; --k) j["maps"].push_back(t.maps[k]);
  j["labels"] = t.labels;
  return j.dump();
}

std::string to_json(const SectionedTree& t) {
  auto j = nlohmann::ordered_json::parse(to_json(t.tree));
  j["section"] = t.section;
  return j.dump();
}

LeveledTree leveled_from_json(const std::string& s) {
  auto j = nlohmann::json::parse(s);
  LeveledTree t;
  t.labels = j.at("labels").get<std::vector<int>>();
  auto m = j.at("maps").get<std::vector<std::vector<int>>>();
  t.maps.assign(m.rbegin(), m.rend());
  auto levels = j.at("levels").get<std::vector<int>>();
  if (static_cast<int>(levels.size()) != t.height() + 1)
    throw std::invalid_argument("levels list does not match the maps");
  return t;
}

SectionedTree sectioned_from_json(const std::string& s) {
  auto j = nlohmann::json::parse(s);
  SectionedTree t;
  t.tree = leveled_from_json(s);
  t.section = j.at("section").get<int>();
  return t;
}

// ---- enumeration ----

namespace {

// All non-decreasing surjections [upper] ->> [lower] as index lists.
std::vector<std::vector<int>> monotone_surjections(int upper, int lower) {
  std::vector<std::vector<int>> out;
  if (lower > upper || lower < 1) return out;
  // choose the lower-1 ascent positions among upper-1 gaps
  std::vector<int> choose(lower - 1);
  std::function<void(int, int)> rec = [&](int idx, int from) {
    if (idx == lower - 1) {
      std::vector<int> m(upper);
      int v = 0;
      size_t c = 0;
      for (int q = 0; q < upper; ++q) {
        if (c < choose.size() && q == choose[c] + 1) {
          ++v;
          ++c;
        }
        m[q] = v;
      }
      out.push_back(m);
      return;
    }
    for (int g = from; g <= upper - 1 - (lower - 1 - idx); ++g) {
      choose[idx] = g;
      rec(idx + 1, g + 1);
    }
  };
  rec(0, 0);
  return out;
}

void all_label_perms(int n, const std::function<void(const std::vector<int>&)>& emit) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 1);
  do {
    emit(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

// Cross product of per-step surjection choices over a size chain
// sizes = [1 = |V_0|, |V_1|, ..., |V_h|, n].
void chains_for_sizes(const std::vector<int>& sizes,
                      const std::function<void(const std::vector<std::vector<int>>&)>& emit) {
  const int steps = static_cast<int>(sizes.size()) - 1;
  std::vector<std::vector<std::vector<int>>> choices(steps);
  for (int j = 0; j < steps; ++j) {
    choices[j] = monotone_surjections(sizes[j + 1], sizes[j]);
    if (choices[j].empty()) return;
  }
  std::vector<std::vector<int>> pick(steps);
  std::function<void(int)> rec = [&](int j) {
    if (j == steps) {
      emit(pick);
      return;
    }
    for (const auto& c : choices[j]) {
      pick[j] = c;
      rec(j + 1);
    }
  };
  rec(0);
}

}  // namespace

std::vector<LeveledTree> enumerate_leveled(int n) {
  if (n < 2) throw std::invalid_argument("leveled trees need arity >= 2");
  std::vector<LeveledTree> out;
  // strictly increasing interior sizes 1 < m_1 < ... < m_h < n
  std::vector<int> sizes = {1};
  std::function<void()> rec = [&]() {
    std::vector<int> full = sizes;
    full.push_back(n);
    bool ok = true;
    for (size_t i = 0; i + 1 < full.size(); ++i)
      if (full[i + 1] <= full[i]) ok = false;
    if (ok) {
      chains_for_sizes(full, [&](const std::vector<std::vector<int>>& maps) {
        all_label_perms(n, [&](const std::vector<int>& perm) {
          LeveledTree t;
          t.maps = maps;
          t.labels = perm;
          out.push_back(std::move(t));
        });
      });
    }
    int last = sizes.back();
    for (int next = last + 1; next < n; ++next) {
      sizes.push_back(next);
      rec();
      sizes.pop_back();
    }
  };
  rec();
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SectionedTree> enumerate_sectioned(int n) {
  if (n < 1) throw std::invalid_argument("sectioned trees need arity >= 1");
  std::vector<SectionedTree> out;
  // interior sizes with strict growth except possibly at the section step
  std::function<void(std::vector<int>&, int)> rec = [&](std::vector<int>& sizes, int h) {
    // sizes = [1, m_1, ..., m_h]; close with the leaf line n
    for (int section = 0; section <= h; ++section) {
      bool ok = true;
      for (int j = 0; j <= h; ++j) {
        int upper = (j == h) ? n : sizes[j + 1];
        if (j == section ? upper < sizes[j] : upper <= sizes[j]) ok = false;
      }
      if (!ok) continue;
      std::vector<int> full = sizes;
      full.push_back(n);
      chains_for_sizes(full, [&](const std::vector<std::vector<int>>& maps) {
        all_label_perms(n, [&](const std::vector<int>& perm) {
          SectionedTree t;
          t.tree.maps = maps;
          t.tree.labels = perm;
          t.section = section;
          out.push_back(std::move(t));
        });
      });
    }
    int last = sizes.back();
    bool repeated = false;  // at most one equal step can ever validate
    for (size_t j = 1; j < sizes.size(); ++j)
      if (sizes[j] == sizes[j - 1]) repeated = true;
    for (int next = repeated ? last + 1 : last; next <= n; ++next) {
      sizes.push_back(next);
      rec(sizes, h + 1);
      sizes.pop_back();
    }
  };
  std::vector<int> sizes = {1};
  rec(sizes, 0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---- morphisms ----

bool is_permutable(const LeveledTree& t, int i) {
  if (i < 1 || i >= t.height()) throw std::out_of_range("permutable level index");
  for (int q = 0; q < t.level_size(i + 1); ++q) {
    if (t.arity(i + 1, q) >= 2 && t.arity(i, t.maps[i][q]) >= 2) return false;
  }
  return true;
}

bool is_permutable(const SectionedTree& t, int i) {
  if (t.section == i || t.section == i + 1)
    throw std::invalid_argument("permutation adjacent to the main section");
  return is_permutable(t.tree, i);
}

PermuteResult permute(const LeveledTree& t, int i) {
  if (!is_permutable(t, i)) throw std::invalid_argument("levels not permutable");
  const int szA = t.level_size(i);
  PermuteResult res;

  // children of level-i positions are consecutive runs in maps[i]
  std::vector<std::vector<int>> kids(szA);
  for (int q = 0; q < t.level_size(i + 1); ++q) kids[t.maps[i][q]].push_back(q);
  // grandchildren runs at level i+2 (or the leaf line)
  const std::vector<int>& up = t.maps[i + 1];
  std::vector<std::vector<int>> gkids(t.level_size(i + 1));
  for (int r = 0; r < static_cast<int>(up.size()); ++r) gkids[up[r]].push_back(r);

  std::vector<int> new_mid;                 // new maps[i]
  std::vector<int> new_up(up.size(), 0);    // new maps[i+1]
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> moved;

  for (int a = 0; a < szA; ++a) {
    int out_pos_mid_start = static_cast<int>(new_mid.size());
    if (kids[a].size() >= 2) {
      // big vertex at level i moves up: one merged child
      new_mid.push_back(a);
      for (int q : kids[a])
        for (int r : gkids[q]) new_up[r] = out_pos_mid_start;
      moved.push_back({{i, a}, {i + 1, out_pos_mid_start}});
    } else {
      int b = kids[a][0];
      if (gkids[b].size() >= 2) {
        // big vertex at level i+1 moves down to a; one pad per incoming edge
        for (size_t j = 0; j < gkids[b].size(); ++j) {
          new_mid.push_back(a);
          new_up[gkids[b][j]] = out_pos_mid_start + static_cast<int>(j);
        }
        moved.push_back({{i + 1, b}, {i, a}});
      } else {
        new_mid.push_back(a);
        new_up[gkids[b][0]] = out_pos_mid_start;
      }
    }
  }

  res.tree = t;
  res.tree.maps[i] = std::move(new_mid);
  res.tree.maps[i + 1] = std::move(new_up);

  // big-vertex correspondence: untouched levels map identically
  for (int lvl = 0; lvl <= t.height(); ++lvl) {
    for (int p = 0; p < t.level_size(lvl); ++p) {
      if (t.arity(lvl, p) < 2) continue;
      if (lvl == i || lvl == i + 1) continue;
      res.big_vertex_map.push_back({{lvl, p}, {lvl, p}});
    }
  }
  for (auto& m : moved) res.big_vertex_map.push_back(m);
  std::sort(res.big_vertex_map.begin(), res.big_vertex_map.end());
  return res;
}

SectionedTree permute(const SectionedTree& t, int i) {
  if (t.section == i || t.section == i + 1)
    throw std::invalid_argument("permutation adjacent to the main section");
  SectionedTree out;
  out.tree = permute(t.tree, i).tree;
  out.section = t.section;
  return out;
}

namespace {

std::optional<LeveledTree> contract_impl(const LeveledTree& t, int from, int to, int section) {
  if (from > to) return t;  // empty interval: identity
  if (from < 1 || to > t.height()) return std::nullopt;
  if (section >= from && section <= to) return std::nullopt;
  LeveledTree out;
  out.labels = t.labels;
  for (int j = 0; j < from - 1; ++j) out.maps.push_back(t.maps[j]);
  // compose t_{from-1} .. t_{to}: domain = V_{to+1}
  std::vector<int> comp = t.maps[to];
  for (int j = to - 1; j >= from - 1; --j)
    for (int& v : comp) v = t.maps[j][v];
  out.maps.push_back(std::move(comp));
  for (int j = to + 1; j <= t.height(); ++j) out.maps.push_back(t.maps[j]);
  int new_section = section > to ? section - (to - from + 1) : section;
  ValidationReport rep;
  validate_chain(out, section < 0 ? -1 : new_section, rep);
  if (!rep.ok()) return std::nullopt;
  return out;
}

}  // namespace

std::optional<LeveledTree> contract(const LeveledTree& t, int from, int to) {
  return contract_impl(t, from, to, -1);
}

std::optional<SectionedTree> contract(const SectionedTree& t, int from, int to) {
  auto chain = contract_impl(t.tree, from, to, t.section);
  if (!chain) return std::nullopt;
  SectionedTree out;
  out.tree = *chain;
  out.section = t.section > to ? t.section - (to - from + 1) : t.section;
  return out;
}

LeveledTree apply_step(const LeveledTree& t, const TreeMorphismStep& s) {
  if (const auto* iso = std::get_if<TreeMorphismStep::Iso>(&s.step)) {
    LeveledTree out = t;
    for (int& l : out.labels) l = iso->relabel.at(l - 1);
    return out;
  }
  if (const auto* c = std::get_if<TreeMorphismStep::Contract>(&s.step)) {
    auto out = contract(t, c->from, c->to);
    if (!out) throw std::invalid_argument("invalid contraction interval");
    return *out;
  }
  const auto& p = std::get<TreeMorphismStep::Permute>(s.step);
  return permute(t, p.level).tree;
}

// ---- alpha / beta ----

namespace {

struct AlphaResult {
  PlanarTree tree;
  // (level, pos) of each kept vertex -> preorder node index, sorted by (level, pos)
  std::vector<std::pair<std::pair<int, int>, int>> kept;
};

AlphaResult alpha_impl(const LeveledTree& t, int section) {
  const int h = t.height();
  PlanarTree out;
  out.leaf_count = t.leaf_count();
  std::map<std::pair<int, int>, int> node_of;
  bool marks = section >= 0;

  // children entries of vertex (level, pos)
  auto kids_of = [&](int level, int pos) {
    std::vector<std::pair<int, int>> kids;  // (child pos | leaf pos, is_leaf)
    const auto& m = t.maps[level];
    for (int q = 0; q < static_cast<int>(m.size()); ++q)
      if (m[q] == pos) kids.push_back({q, level == h});
    return kids;
  };

  std::function<int(int, int)> build = [&](int level, int pos) -> int {
    // returns a kid entry for the planar tree (node index or negative label)
    bool keep = t.arity(level, pos) >= 2 || level == section;
    std::vector<int> kid_entries;
    for (auto [q, is_leaf] : kids_of(level, pos)) {
      if (is_leaf)
        kid_entries.push_back(-t.labels[q]);
      else
        kid_entries.push_back(build(level + 1, q));
    }
    if (!keep) return kid_entries[0];
    int idx = static_cast<int>(out.nodes.size());
    out.nodes.push_back({std::move(kid_entries)});
    if (marks) out.marks.push_back(level == section ? 1 : 0);
    node_of[{level, pos}] = idx;
    return idx;
  };

  int root_entry = build(0, 0);
  if (root_entry < 0)
    throw std::invalid_argument("alpha: chain with no retained vertex");

  // nodes were appended post-order; renumber into preorder from the root entry
  {
    std::vector<int> order;
    std::function<void(int)> walk = [&](int v) {
      order.push_back(v);
      for (int kid : out.nodes[v].kids)
        if (kid >= 0) walk(kid);
    };
    walk(root_entry);
    std::vector<int> new_of_old(out.nodes.size());
    for (size_t i = 0; i < order.size(); ++i) new_of_old[order[i]] = static_cast<int>(i);
    PlanarTree fixed;
    fixed.leaf_count = out.leaf_count;
    fixed.nodes.resize(order.size());
    if (marks) fixed.marks.assign(order.size(), 0);
    for (size_t i = 0; i < order.size(); ++i) {
      PlanarTree::Node nd;
      for (int kid : out.nodes[order[i]].kids)
        nd.kids.push_back(kid >= 0 ? new_of_old[kid] : kid);
      fixed.nodes[i] = std::move(nd);
      if (marks) fixed.marks[i] = out.marks[order[i]];
    }
    out = std::move(fixed);
    for (auto& [lp, idx] : node_of) idx = new_of_old[idx];
  }

  AlphaResult res;
  res.tree = std::move(out);
  for (const auto& [lp, idx] : node_of) res.kept.push_back({lp, idx});
  std::sort(res.kept.begin(), res.kept.end());
  return res;
}

}  // namespace

PlanarTree alpha(const LeveledTree& t) { return alpha_impl(t, -1).tree; }

PlanarTree canonical_class(const SectionedTree& t) {
  return alpha_impl(t.tree, t.section).tree;
}

std::vector<std::pair<std::pair<int, int>, int>> big_vertex_class_nodes(const LeveledTree& t) {
  return alpha_impl(t, -1).kept;
}

std::vector<std::pair<std::pair<int, int>, int>> big_vertex_class_nodes(const SectionedTree& t) {
  return alpha_impl(t.tree, t.section).kept;
}

namespace {

// Sweep construction shared by beta and sectioned_beta: `place_level[v]` gives
// the level of every planar node; pads fill the gaps.
LeveledTree sweep_levels(const PlanarTree& p, const std::vector<int>& place_level, int height) {
  struct Slot {
    int node;      // node currently placed here, or -1 for a pad
    int pending;   // kid entry the pad is carrying (node index or negative label)
    int parent;    // slot index at the previous level
  };
  LeveledTree out;
  std::vector<Slot> cur = {{0, 0, 0}};
  for (int level = 1; level <= height + 1; ++level) {
    std::vector<Slot> next;
    std::vector<int> tmap;
    for (size_t s = 0; s < cur.size(); ++s) {
      auto emit = [&](int kid_entry) {
        if (kid_entry >= 0 && place_level[kid_entry] == level)
          next.push_back({kid_entry, 0, static_cast<int>(s)});
        else
          next.push_back({-1, kid_entry, static_cast<int>(s)});
        tmap.push_back(static_cast<int>(s));
      };
      if (cur[s].node >= 0) {
        for (int kid : p.nodes[cur[s].node].kids) emit(kid);
      } else {
        emit(cur[s].pending);
      }
    }
    if (level <= height) {
      out.maps.push_back(tmap);
      cur = std::move(next);
    } else {
      // leaf line
      out.maps.push_back(tmap);
      out.labels.resize(next.size());
      for (size_t q = 0; q < next.size(); ++q) {
        if (next[q].node >= 0 || next[q].pending >= 0)
          throw std::logic_error("sweep: non-leaf at the leaf line");
        out.labels[q] = -next[q].pending;
      }
    }
  }
  return out;
}

}  // namespace

LeveledTree beta(const PlanarTree& p) {
  if (p.is_bare_leaf() || p.has_marks())
    throw std::invalid_argument("beta expects an unmarked planar tree with a root vertex");
  auto depth = p.depths();
  std::vector<int> order(p.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return depth[a] < depth[b]; });
  std::vector<int> place(p.nodes.size());
  for (size_t r = 0; r < order.size(); ++r) place[order[r]] = static_cast<int>(r);
  return sweep_levels(p, place, static_cast<int>(p.nodes.size()) - 1);
}

SectionedTree sectioned_beta(const PlanarTree& p) {
  if (!marks_are_section(p)) throw std::invalid_argument("marks do not form a section");
  auto depth = p.depths();
  // below = unmarked with a mark somewhere beneath
  std::vector<char> below(p.nodes.size(), 0);
  std::function<bool(int)> has_mark = [&](int v) -> bool {
    if (p.marked(v)) return true;
    bool any = false;
    for (int kid : p.nodes[v].kids)
      if (kid >= 0 && has_mark(kid)) any = true;
    return any;
  };
  int below_count = 0, marked_count = 0;
  for (size_t v = 0; v < p.nodes.size(); ++v) {
    if (p.marked(static_cast<int>(v))) {
      ++marked_count;
    } else if (has_mark(static_cast<int>(v))) {
      below[v] = 1;
      ++below_count;
    }
  }
  std::vector<int> below_nodes, above_nodes;
  for (size_t v = 0; v < p.nodes.size(); ++v) {
    if (p.marked(static_cast<int>(v))) continue;
    (below[v] ? below_nodes : above_nodes).push_back(static_cast<int>(v));
  }
  auto by_depth = [&](std::vector<int>& vs) {
    std::stable_sort(vs.begin(), vs.end(), [&](int a, int b) { return depth[a] < depth[b]; });
  };
  by_depth(below_nodes);
  by_depth(above_nodes);

  std::vector<int> place(p.nodes.size());
  for (size_t r = 0; r < below_nodes.size(); ++r) place[below_nodes[r]] = static_cast<int>(r);
  int section = below_count;
  for (size_t v = 0; v < p.nodes.size(); ++v)
    if (p.marked(static_cast<int>(v))) place[v] = section;
  for (size_t r = 0; r < above_nodes.size(); ++r)
    place[above_nodes[r]] = section + 1 + static_cast<int>(r);

  (void)marked_count;
  const int height = below_count + static_cast<int>(above_nodes.size());
  SectionedTree out;
  out.tree = sweep_levels(p, place, height);
  out.section = section;
  return out;
}

// ---- composition ----

LeveledTree circ(const LeveledTree& t, int label, const LeveledTree& part) {
  const int n0 = t.leaf_count();
  const int n1 = part.leaf_count();
  int p0 = -1;
  for (int p = 0; p < n0; ++p)
    if (t.labels[p] == label) p0 = p;
  if (p0 < 0) throw std::invalid_argument("circ: no leaf with the given label");
  const int h0 = t.height(), h1 = part.height();

  LeveledTree out;
  out.maps = t.maps;  // levels 0..h0 unchanged; old leaf line becomes level h0+1 parents
  // part levels j = 0..h1 live at h0+1+j; sizes: (n0 - 1) stubs + |V_j(part)|
  for (int j = 1; j <= h1 + 1; ++j) {
    int part_upper = (j == h1 + 1) ? n1 : part.level_size(j);
    int part_lower = part.level_size(j - 1);
    std::vector<int> m;
    m.reserve(p0 + part_upper + (n0 - 1 - p0));
    for (int s = 0; s < p0; ++s) m.push_back(s);
    for (int r = 0; r < part_upper; ++r)
      m.push_back(p0 + (j == h1 + 1 ? part.maps[h1][r] : part.maps[j - 1][r]));
    for (int s = p0 + 1; s < n0; ++s) m.push_back(p0 + part_lower + (s - p0 - 1));
    out.maps.push_back(std::move(m));
  }

  out.labels.resize(n0 + n1 - 1);
  auto relab = [&](int old) { return old < label ? old : old + n1 - 1; };
  for (int s = 0; s < p0; ++s) out.labels[s] = relab(t.labels[s]);
  for (int r = 0; r < n1; ++r) out.labels[p0 + r] = label + part.labels[r] - 1;
  for (int s = p0 + 1; s < n0; ++s)
    out.labels[p0 + n1 + (s - p0 - 1)] = relab(t.labels[s]);
  (void)h0;
  return out;
}

LeveledTree gamma(const LeveledTree& t, const std::vector<std::optional<LeveledTree>>& parts) {
  if (static_cast<int>(parts.size()) != t.leaf_count())
    throw std::invalid_argument("gamma: arity mismatch");
  LeveledTree acc = t;
  int label = 1;
  for (const auto& part : parts) {
    if (part) {
      acc = circ(acc, label, *part);
      label += part->leaf_count();
    } else {
      label += 1;
    }
  }
  return acc;
}

SectionedTree gamma_right(const SectionedTree& t,
                          const std::vector<std::optional<LeveledTree>>& parts) {
  SectionedTree out;
  out.tree = gamma(t.tree, parts);
  out.section = t.section;
  return out;
}

namespace {

// Drops every all-bivalent level and splices bivalent roots, normalizing a
// subtree extraction into a valid leveled tree. Returns nullopt for a pad
// chain (the unit slot).
std::optional<LeveledTree> drop_pad_levels(LeveledTree cur) {
  bool changed = true;
  while (changed) {
    changed = false;
    if (cur.leaf_count() == 1) return std::nullopt;
    if (cur.height() >= 1 && cur.level_size(1) == 1) {
      cur.maps.erase(cur.maps.begin());  // splice a bivalent root
      changed = true;
      continue;
    }
    for (int j = 1; j <= cur.height(); ++j) {
      int upper = (j == cur.height()) ? cur.leaf_count() : cur.level_size(j + 1);
      if (upper != cur.level_size(j)) continue;  // level j has an arity>=2 vertex
      LeveledTree next;
      next.labels = cur.labels;
      for (int x = 0; x < j - 1; ++x) next.maps.push_back(cur.maps[x]);
      std::vector<int> comp = cur.maps[j];
      for (int& v : comp) v = cur.maps[j - 1][v];
      next.maps.push_back(std::move(comp));
      for (int x = j + 1; x <= cur.height(); ++x) next.maps.push_back(cur.maps[x]);
      cur = std::move(next);
      changed = true;
      break;
    }
  }
  return cur;
}

}  // namespace

LeveledTree gamma_prov(const LeveledTree& t, const std::vector<std::optional<LeveledTree>>& parts,
                       ComposeProvenance* prov) {
  if (static_cast<int>(parts.size()) != t.leaf_count())
    throw std::invalid_argument("gamma_prov: arity mismatch");
  LeveledTree acc = t;
  if (prov) {
    for (int lvl = 0; lvl <= t.height(); ++lvl)
      for (int pos = 0; pos < t.level_size(lvl); ++pos)
        prov->vertex_src[{lvl, pos}] = {-1, lvl, pos};
    for (int lvl = 1; lvl <= t.height(); ++lvl) prov->slot_src[lvl] = {-1, lvl};
  }
  int label = 1;
  int base = t.height();
  for (size_t i = 0; i < parts.size(); ++i) {
    if (!parts[i]) {
      label += 1;
      continue;
    }
    const LeveledTree& part = *parts[i];
    int p0 = -1;
    for (int p = 0; p < acc.leaf_count(); ++p)
      if (acc.labels[p] == label) p0 = p;
    acc = circ(acc, label, part);
    if (prov) {
      for (int j = 0; j <= part.height(); ++j) {
        for (int pos = 0; pos < part.level_size(j); ++pos)
          prov->vertex_src[{base + 1 + j, p0 + pos}] =
              {static_cast<int>(i), j, pos};
        if (j >= 1) prov->slot_src[base + 1 + j] = {static_cast<int>(i), j};
      }
      prov->slot_src[base + 1] = {-2, static_cast<int>(i)};  // part-root level
    }
    base += part.height() + 1;
    label += part.leaf_count();
  }
  return acc;
}

SectionedTree gamma_left(const LeveledTree& t0, const std::vector<SectionedTree>& parts) {
  return gamma_left_prov(t0, parts, nullptr);
}

SectionedTree gamma_left_prov(const LeveledTree& t0, const std::vector<SectionedTree>& parts,
                              ComposeProvenance* prov) {
  const int k = t0.leaf_count();
  if (static_cast<int>(parts.size()) != k)
    throw std::invalid_argument("gamma_left: arity mismatch");

  // below-section chains, with the section slots as their leaves
  std::vector<std::optional<LeveledTree>> lower(k);
  std::vector<int> mcount(k);  // section vertex counts
  for (int i = 0; i < k; ++i) {
    const auto& s = parts[i];
    mcount[i] = s.tree.level_size(s.section);
    if (s.section == 0) continue;  // unit slot
    LeveledTree b;
    b.maps.assign(s.tree.maps.begin(), s.tree.maps.begin() + s.section);
    b.labels.resize(mcount[i]);
    std::iota(b.labels.begin(), b.labels.end(), 1);
    lower[i] = std::move(b);
  }
  ComposeProvenance lower_prov;
  LeveledTree dl = gamma_prov(t0, lower, prov ? &lower_prov : nullptr);
  const int big_h = dl.height();
  if (prov) {
    // head levels keep their provenance; below-part levels map to the parts'
    // own below slots (the part-root levels are honest slots here)
    for (const auto& [lp, src] : lower_prov.vertex_src) prov->vertex_src[lp] = src;
    for (const auto& [lvl, src] : lower_prov.slot_src) {
      if (src.first == -2)
        prov->slot_src[lvl] = {src.second, 0};
      else
        prov->slot_src[lvl] = src;
    }
    prov->slot_src[0] = {-2, -1};  // the root level form is evaluated at 1
  }

  // one new level holding all section vertices, at the old leaf slots
  LeveledTree hat = dl;
  // section slot s corresponds to part(label) and its section vertex
  const int nsec = dl.leaf_count();
  std::vector<int> offm(k + 1, 0);
  for (int i = 0; i < k; ++i) offm[i + 1] = offm[i] + mcount[i];
  struct SlotRef {
    int part;
    int vertex;  // position on the part's section level
  };
  std::vector<SlotRef> slot(nsec);
  for (int ppos = 0; ppos < nsec; ++ppos) {
    int lab = dl.labels[ppos];
    int i = 0;
    while (lab > offm[i + 1]) ++i;
    slot[ppos] = {i, lab - offm[i] - 1};
  }
  // in-edges of each slot, in planar order
  struct Edge {
    int part;
    std::optional<LeveledTree> sub;    // normalized above-subtree (unit if nullopt)
    std::vector<int> original_labels;  // the part's own labels under this edge
    std::vector<int> level_src;              // sub level -> level in the part
    std::vector<std::vector<int>> pos_src;   // sub (level, pos) -> position in the part
  };
  std::vector<Edge> edges;
  std::vector<int> sec_line;  // map: in-edge -> section slot
  for (int pos = 0; pos < nsec; ++pos) {
    const auto& s = parts[slot[pos].part];
    int iota = s.section;
    int v = slot[pos].vertex;
    const auto& up = s.tree.maps[iota];
    for (int q = 0; q < static_cast<int>(up.size()); ++q) {
      if (up[q] != v) continue;
      Edge e;
      e.part = slot[pos].part;
      if (iota == s.tree.height()) {
        e.original_labels = {s.tree.labels[q]};
      } else {  // extract the sub-chain with level/position tracking
        // extract the sub-chain above the edge rooted at (iota+1, q)
        const auto& st = s.tree;
        std::vector<std::vector<int>> keep(st.height() - iota);  // levels iota+1..h
        keep[0].push_back(q);
        for (int lvl = iota + 1; lvl < st.height(); ++lvl) {
          const auto& m = st.maps[lvl];
          for (int r = 0; r < static_cast<int>(m.size()); ++r) {
            const auto& prev = keep[lvl - iota - 1];
            if (std::find(prev.begin(), prev.end(), m[r]) != prev.end())
              keep[lvl - iota].push_back(r);
          }
        }
        LeveledTree sub;
        std::vector<int> raw_level_src;
        std::vector<std::vector<int>> raw_pos_src;
        raw_level_src.push_back(iota + 1);
        raw_pos_src.push_back(keep[0]);
        for (int lvl = iota + 1; lvl <= st.height(); ++lvl) {
          const auto& prev = keep[lvl - iota - 1];
          std::vector<int> m;
          const auto& src = st.maps[lvl];
          auto in_prev = [&](int x) {
            return static_cast<int>(std::find(prev.begin(), prev.end(), x) - prev.begin());
          };
          if (lvl < st.height()) {
            for (int r : keep[lvl - iota]) m.push_back(in_prev(src[r]));
            raw_level_src.push_back(lvl + 1);
            raw_pos_src.push_back(keep[lvl - iota]);
          } else {
            for (int r = 0; r < static_cast<int>(src.size()); ++r)
              if (std::find(prev.begin(), prev.end(), src[r]) != prev.end()) {
                m.push_back(in_prev(src[r]));
                e.original_labels.push_back(st.labels[r]);
              }
          }
          sub.maps.push_back(std::move(m));
        }
        sub.labels.resize(e.original_labels.size());
        std::iota(sub.labels.begin(), sub.labels.end(), 1);
        // drop all-bivalent levels while keeping the level/position sources
        {
          LeveledTree cur = sub;
          std::vector<int> lvl_src = raw_level_src;
          std::vector<std::vector<int>> pos_src = raw_pos_src;
          bool changed = true;
          bool unit = false;
          while (changed) {
            changed = false;
            if (cur.leaf_count() == 1) {
              unit = true;
              break;
            }
            if (cur.height() >= 1 && cur.level_size(1) == 1) {
              cur.maps.erase(cur.maps.begin());
              lvl_src.erase(lvl_src.begin());
              pos_src.erase(pos_src.begin());
              changed = true;
              continue;
            }
            for (int j = 1; j <= cur.height(); ++j) {
              int upper = (j == cur.height()) ? cur.leaf_count() : cur.level_size(j + 1);
              if (upper != cur.level_size(j)) continue;
              LeveledTree next;
              next.labels = cur.labels;
              for (int x = 0; x < j - 1; ++x) next.maps.push_back(cur.maps[x]);
              std::vector<int> comp = cur.maps[j];
              for (int& v : comp) v = cur.maps[j - 1][v];
              next.maps.push_back(std::move(comp));
              for (int x = j + 1; x <= cur.height(); ++x) next.maps.push_back(cur.maps[x]);
              cur = std::move(next);
              lvl_src.erase(lvl_src.begin() + j);
              pos_src.erase(pos_src.begin() + j);
              changed = true;
              break;
            }
          }
          if (unit) {
            e.sub = std::nullopt;
            if (e.original_labels.size() != 1)
              throw std::logic_error("gamma_left: pad chain with several leaves");
          } else {
            e.sub = cur;
            e.level_src = lvl_src;
            e.pos_src = pos_src;
          }
        }
      }
      edges.push_back(std::move(e));
      sec_line.push_back(pos);
    }
  }

  hat.maps.push_back(sec_line);
  hat.labels.resize(edges.size());
  std::iota(hat.labels.begin(), hat.labels.end(), 1);

  SectionedTree shat;
  shat.tree = hat;
  shat.section = big_h + 1;
  if (prov) {
    // the section vertices come from the parts' section levels
    for (int pos = 0; pos < nsec; ++pos)
      prov->vertex_src[{big_h + 1, pos}] = {slot[pos].part, parts[slot[pos].part].section,
                                            slot[pos].vertex};
  }

  std::vector<std::optional<LeveledTree>> above(edges.size());
  for (size_t e2 = 0; e2 < edges.size(); ++e2) above[e2] = edges[e2].sub;
  ComposeProvenance above_prov;
  SectionedTree result;
  result.tree = gamma_prov(shat.tree, above, prov ? &above_prov : nullptr);
  result.section = shat.section;
  if (prov) {
    for (const auto& [lp, src] : above_prov.vertex_src) {
      auto [blk, lvl, pos] = src;
      if (blk < 0) continue;  // hat vertices already recorded
      const Edge& e2 = edges[blk];
      prov->vertex_src[lp] = {e2.part, e2.level_src[lvl], e2.pos_src[lvl][pos]};
    }
    for (const auto& [lvl, src] : above_prov.slot_src) {
      if (src.first == -1) continue;  // hat levels already recorded (or the section)
      const Edge& e2 = edges[src.first == -2 ? src.second : src.first];
      int sub_lvl = src.first == -2 ? 0 : src.second;
      prov->slot_src[lvl] = {e2.part, e2.level_src[sub_lvl]};
    }
  }

  // final labels by provenance
  std::vector<int> offn(k + 1, 0);
  for (int i = 0; i < k; ++i) offn[i + 1] = offn[i] + parts[i].tree.leaf_count();
  std::vector<int> final_labels;
  for (const auto& e : edges)
    for (int lab : e.original_labels) final_labels.push_back(offn[e.part] + lab);
  if (final_labels.size() != result.tree.labels.size())
    throw std::logic_error("gamma_left: leaf bookkeeping mismatch");
  result.tree.labels = final_labels;
  return result;
}

}  // namespace operadkit
