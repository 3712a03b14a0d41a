#include "s2s/scene_graph.hpp"

#include "s2s/error.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <tuple>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace s2s {
namespace {

using fixtures::box;
using fixtures::object;

SceneLayout scene_of(std::vector<SceneObject> objs) {
  SceneLayout s;
  s.scene_id = "t";
  s.floor = fixtures::square_floor(-10, 10);
  s.objects = std::move(objs);
  return s;
}

bool has(const SceneGraph& g, RelationKind k, const std::string& p, const std::string& c) {
  for (const auto& r : g.relations)
    if (r.kind == k && r.parent == p && r.child == c) return true;
  return false;
}

TEST(SceneGraph, CupOnTable) {
  const auto s = scene_of({object("table", box(0, 0, 0, 1.2, 0.8, 0.75)), object("cup", box(0.5, 0.3, 0.75, 0.6, 0.4, 0.85))});
  const auto g = build_scene_graph(s);
  ASSERT_EQ(g.relations.size(), 1u);
  EXPECT_TRUE(has(g, RelationKind::kSupport, "table", "cup"));
  EXPECT_EQ(g.relations[0].evidence.vertical_gap, 0.0);
  EXPECT_EQ(g.relations[0].evidence.overlap_ratio, 1.0);
  EXPECT_EQ(g.floor_supported, std::vector<std::string>{"table"});
}

TEST(SceneGraph, BookInCabinet) {
  const auto s = scene_of({object("cabinet", box(0, 0, 0, 1, 0.5, 2)), object("book", box(0.2, 0.1, 0.5, 0.4, 0.35, 0.8))});
  const auto g = build_scene_graph(s);
  ASSERT_EQ(g.relations.size(), 1u);
  EXPECT_TRUE(has(g, RelationKind::kContainment, "cabinet", "book"));
}

TEST(SceneGraph, BottleEmbeddedInHolder) {
  const auto s = scene_of({object("holder", box(0, 0, 0.5, 0.3, 0.3, 0.7)), object("bottle", box(0.1, 0.1, 0.6, 0.2, 0.2, 1.0))});
  const auto g = build_scene_graph(s);
  ASSERT_EQ(g.relations.size(), 1u);
  EXPECT_TRUE(has(g, RelationKind::kEmbedding, "holder", "bottle"));
  EXPECT_NEAR(g.relations[0].evidence.volume_inside_ratio, 0.25, 1e-12);
}

TEST(SceneGraph, NearestSupporterWins) {
  // Two shelves both within the gap window; the closer top surface wins.
  const auto s = scene_of({object("low", box(0, 0, 0, 1, 1, 0.50)), object("high", box(0, 0, 0.2, 1, 1, 0.51)),
                           object("box", box(0.2, 0.2, 0.515, 0.4, 0.4, 0.6))});
  const auto g = build_scene_graph(s);
  EXPECT_TRUE(has(g, RelationKind::kSupport, "high", "box"));
  EXPECT_FALSE(has(g, RelationKind::kSupport, "low", "box"));
}

TEST(SceneGraph, EmptySceneAndDuplicates) {
  EXPECT_TRUE(build_scene_graph(scene_of({})).relations.empty());
  EXPECT_THROW(build_scene_graph(scene_of({object("a", box(0, 0, 0, 1, 1, 1)), object("a", box(2, 0, 0, 3, 1, 1))})),
               Error);
}

TEST(SceneGraph, KindNames) {
  for (auto k : {RelationKind::kSupport, RelationKind::kContainment, RelationKind::kEmbedding})
    EXPECT_EQ(parse_relation_kind(relation_kind_name(k)), k);
  EXPECT_THROW(parse_relation_kind("on_top"), Error);
}

// Exhaustive rule checker over plain arrays.
struct OracleRel {
  int kind;  // 0 support, 1 containment, 2 embedding
  std::string parent, child;
  auto key() const { return std::tie(kind, parent, child); }
  bool operator<(const OracleRel& o) const { return key() < o.key(); }
  bool operator==(const OracleRel& o) const { return key() == o.key(); }
};

void PrintTo(const OracleRel& r, std::ostream* os) { *os << r.kind << ":" << r.parent << "->" << r.child; }

double foot_ratio(const oracle::Box& p, const oracle::Box& c) {
  const double area = (c.hi[0] - c.lo[0]) * (c.hi[1] - c.lo[1]);
  const double ox = std::min(p.hi[0], c.hi[0]) - std::max(p.lo[0], c.lo[0]);
  const double oy = std::min(p.hi[1], c.hi[1]) - std::max(p.lo[1], c.lo[1]);
  if (area <= 0 || ox <= 0 || oy <= 0) return 0;
  return std::min(1.0, ox * oy / area);
}

double in_ratio(oracle::Box p, const oracle::Box& c, double inflate) {
  for (int i = 0; i < 3; ++i) p.lo[i] -= inflate, p.hi[i] += inflate;
  return std::min(1.0, oracle::inter(p, c) / oracle::volume(c));
}

bool bigger(const std::string& ia, const oracle::Box& a, const std::string& ib, const oracle::Box& b) {
  const double va = oracle::volume(a), vb = oracle::volume(b);
  return va != vb ? va > vb : ia < ib;
}

bool is_containment(const std::string& ip, const oracle::Box& p, const std::string& ic, const oracle::Box& c) {
  return bigger(ip, p, ic, c) && in_ratio(p, c, 0.02) >= 0.9;
}

bool is_support(const oracle::Box& p, const oracle::Box& c) {
  const double gap = c.lo[2] - p.hi[2];
  return gap >= -0.01 && gap <= 0.02 && foot_ratio(p, c) >= 0.3 && c.lo[2] > p.lo[2];
}

std::set<OracleRel> oracle_graph(const std::vector<std::string>& ids, const std::vector<oracle::Box>& b) {
  std::set<OracleRel> out;
  for (std::size_t c = 0; c < b.size(); ++c) {
    int best_cont = -1, best_sup = -1, best_emb = -1;
    double best_ratio = 0;
    for (std::size_t p = 0; p < b.size(); ++p) {
      if (p == c) continue;
      if (is_containment(ids[p], b[p], ids[c], b[c])) {
        if (best_cont < 0 || std::make_pair(oracle::volume(b[p]), ids[p]) <
                                 std::make_pair(oracle::volume(b[static_cast<std::size_t>(best_cont)]),
                                                ids[static_cast<std::size_t>(best_cont)]))
          best_cont = static_cast<int>(p);
        continue;
      }
      if (is_support(b[p], b[c])) {
        auto gap = [&](std::size_t q) { return std::abs(b[c].lo[2] - b[q].hi[2]); };
        if (best_sup < 0 || std::make_pair(gap(p), ids[p]) <
                                std::make_pair(gap(static_cast<std::size_t>(best_sup)), ids[static_cast<std::size_t>(best_sup)]))
          best_sup = static_cast<int>(p);
        continue;
      }
      const double r = in_ratio(b[p], b[c], 0.0);
      if (bigger(ids[p], b[p], ids[c], b[c]) && b[c].lo[2] > b[p].lo[2] + 0.02 && r > 0.1 && r < 0.9) {
        if (best_emb < 0 || r > best_ratio || (r == best_ratio && ids[p] < ids[static_cast<std::size_t>(best_emb)]))
          best_emb = static_cast<int>(p), best_ratio = r;
      }
    }
    if (best_sup >= 0) {
      out.insert({0, ids[static_cast<std::size_t>(best_sup)], ids[c]});
    } else if (best_cont >= 0) {
      out.insert({1, ids[static_cast<std::size_t>(best_cont)], ids[c]});
    } else if (best_emb >= 0) {
      out.insert({2, ids[static_cast<std::size_t>(best_emb)], ids[c]});
    }
  }
  return out;
}

// Furniture on the floor with stacked, contained and embedded children.
SceneLayout random_scene(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<SceneObject> objs;
  for (int i = 0; i < n; ++i) {
    const std::string id = "o" + std::to_string(100 + i);
    const double roll = u(gen);
    if (objs.empty() || roll < 0.35) {
      const double x = 8 * u(gen), y = 8 * u(gen);
      objs.push_back(object(id, box(x, y, 0, x + 0.4 + u(gen), y + 0.4 + u(gen), 0.3 + u(gen))));
      continue;
    }
    const auto& p = objs[gen() % objs.size()].box;
    const Vec3 e = p.extent();
    const double w = e.x() * (0.2 + 0.5 * u(gen)), d = e.y() * (0.2 + 0.5 * u(gen));
    const double x = p.min.x() + (e.x() - w) * u(gen) * 1.3, y = p.min.y() + (e.y() - d) * u(gen) * 1.3;
    if (roll < 0.7) {
      const double z = p.max.z() + 0.03 * (u(gen) - 0.3);
      objs.push_back(object(id, box(x, y, z, x + w, y + d, z + 0.05 + 0.3 * u(gen))));
    } else if (roll < 0.85) {
      const double z = p.min.z() + 0.1 * e.z();
      objs.push_back(object(id, box(x, y, z, x + w, y + d, z + 0.6 * e.z() * u(gen) + 0.01)));
    } else {
      const double h = 0.2 + 0.6 * u(gen);
      const double z = p.max.z() - e.z() * h * 0.5;
      objs.push_back(object(id, box(x, y, z, x + w, y + d, z + e.z() * h + 0.02)));
    }
  }
  return scene_of(objs);
}

std::set<OracleRel> as_oracle(const SceneGraph& g) {
  std::set<OracleRel> out;
  for (const auto& r : g.relations) out.insert({static_cast<int>(r.kind), r.parent, r.child});
  return out;
}

TEST(SceneGraph, MatchesExhaustiveRuleChecker) {
  std::mt19937_64 gen(31);
  std::size_t total = 0;
  std::map<int, int> kinds;
  for (int t = 0; t < 40; ++t) {
    const auto s = random_scene(gen, 20);
    std::vector<std::string> ids;
    std::vector<oracle::Box> boxes;
    for (const auto& o : s.objects) ids.push_back(o.id), boxes.push_back(fixtures::to_box(o.box));
    const auto g = build_scene_graph(s);
    EXPECT_EQ(as_oracle(g), oracle_graph(ids, boxes)) << "scene " << t;
    total += g.relations.size();
    for (const auto& r : g.relations) kinds[static_cast<int>(r.kind)]++;
  }
  // The generator must exercise every relation kind.
  EXPECT_GT(total, 100u);
  EXPECT_GT(kinds[0], 0);
  EXPECT_GT(kinds[1], 0);
  EXPECT_GT(kinds[2], 0);
}

TEST(SceneGraph, ForestDeterminismAndStoredEvidence) {
  std::mt19937_64 gen(32);
  for (int t = 0; t < 30; ++t) {
    const auto s = random_scene(gen, 25);
    const auto g = build_scene_graph(s);
    const auto g2 = build_scene_graph(s);
    EXPECT_EQ(g.relations, g2.relations);
    EXPECT_EQ(g.floor_supported, g2.floor_supported);

    for (auto kind : {RelationKind::kSupport, RelationKind::kContainment}) {
      std::map<std::string, std::string> parent;
      for (const auto& r : g.relations) {
        if (r.kind != kind) continue;
        EXPECT_TRUE(parent.emplace(r.child, r.parent).second) << "two parents for " << r.child;
      }
      for (const auto& [child, p0] : parent) {
        std::string cur = p0;
        for (std::size_t hop = 0; hop <= parent.size(); ++hop) {
          ASSERT_NE(cur, child) << "cycle through " << child;
          auto it = parent.find(cur);
          if (it == parent.end()) break;
          cur = it->second;
        }
      }
    }
    for (const auto& r : g.relations) {
      EXPECT_TRUE(satisfies(r.kind, r.evidence));
      EXPECT_GE(s.find(r.parent), 0);
      EXPECT_GE(s.find(r.child), 0);
    }
    EXPECT_TRUE(validate_graph(g, s).empty());
  }
}

TEST(SceneGraph, OneParentPerChild) {
  std::mt19937_64 gen(34);
  for (int t = 0; t < 30; ++t) {
    const auto g = build_scene_graph(random_scene(gen, 25));
    std::set<std::string> seen;
    for (const auto& r : g.relations) EXPECT_TRUE(seen.insert(r.child).second) << r.child;
  }
}

TEST(SceneGraph, SupporterBeatsNeighbouringContainer) {
  // A vase on a low chest that is pushed under a taller desk: the vase touches the chest.
  const auto s = scene_of({object("chest", box(0, 0, 0, 0.5, 0.5, 0.4)), object("desk", box(0.3, -0.2, 0, 1.5, 0.8, 0.9)),
                           object("vase", box(0.32, 0.1, 0.4, 0.45, 0.25, 0.6))});
  const auto g = build_scene_graph(s);
  EXPECT_TRUE(has(g, RelationKind::kSupport, "chest", "vase"));
  EXPECT_EQ(g.relations.size(), 1u);
}

TEST(SceneGraph, ShelfInBookcaseChain) {
  const auto s = scene_of({object("bookcase", box(0, 0, 0, 1, 0.4, 2)), object("shelf", box(0.05, 0.05, 0.9, 0.95, 0.35, 0.95)),
                           object("book", box(0.2, 0.1, 0.95, 0.25, 0.3, 1.2))});
  const auto g = build_scene_graph(s);
  EXPECT_TRUE(has(g, RelationKind::kContainment, "bookcase", "shelf"));
  EXPECT_TRUE(has(g, RelationKind::kSupport, "shelf", "book"));
  EXPECT_EQ(g.relations.size(), 2u);
}

TEST(ValidateGraph, UnmovedIsClean) {
  const auto s = scene_of({object("table", box(0, 0, 0, 1.2, 0.8, 0.75)), object("cup", box(0.5, 0.3, 0.75, 0.6, 0.4, 0.85))});
  EXPECT_TRUE(validate_graph(build_scene_graph(s), s).empty());
}

TEST(ValidateGraph, ChildMovedOffSupporter) {
  auto s = scene_of({object("table", box(0, 0, 0, 1.2, 0.8, 0.75)), object("cup", box(0.5, 0.3, 0.75, 0.6, 0.4, 0.85))});
  const auto g = build_scene_graph(s);
  s.objects[1].box.min.x() += 5;
  s.objects[1].box.max.x() += 5;
  const auto v = validate_graph(g, s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].relation.parent, "table");
  EXPECT_EQ(v[0].relation.child, "cup");
  EXPECT_EQ(v[0].relation.evidence.overlap_ratio, 0.0);
}

TEST(ValidateGraph, FloorLiftIsReported) {
  auto s = scene_of({object("table", box(0, 0, 0, 1, 1, 1))});
  const auto g = build_scene_graph(s);
  s.objects[0].box.min.z() += 0.5;
  s.objects[0].box.max.z() += 0.5;
  const auto v = validate_graph(g, s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].relation.parent, kFloorId);
}

TEST(ValidateGraph, DanglingIdIsError) {
  const auto s = scene_of({object("table", box(0, 0, 0, 1.2, 0.8, 0.75)), object("cup", box(0.5, 0.3, 0.75, 0.6, 0.4, 0.85))});
  auto g = build_scene_graph(s);
  g.relations[0].child = "ghost";
  try {
    validate_graph(g, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST(ValidateGraph, PerturbationsMatchRuleRecheck) {
  std::mt19937_64 gen(33);
  std::normal_distribution<double> jitter(0, 0.05);
  std::size_t reported = 0;
  for (int t = 0; t < 40; ++t) {
    auto s = random_scene(gen, 20);
    const auto g = build_scene_graph(s);
    for (auto& o : s.objects) {
      if (gen() % 3 != 0) continue;
      const Vec3 d(jitter(gen), jitter(gen), 0.2 * jitter(gen));
      o.box.min += d;
      o.box.max += d;
    }
    std::set<OracleRel> expected;
    for (const auto& r : g.relations) {
      const auto p = fixtures::to_box(s.objects[static_cast<std::size_t>(s.find(r.parent))].box);
      const auto c = fixtures::to_box(s.objects[static_cast<std::size_t>(s.find(r.child))].box);
      bool ok = false;
      switch (r.kind) {
        case RelationKind::kSupport: {
          const double gap = c.lo[2] - p.hi[2];
          ok = gap >= -0.01 && gap <= 0.02 && foot_ratio(p, c) >= 0.3;
          break;
        }
        case RelationKind::kContainment: ok = in_ratio(p, c, 0.02) >= 0.9; break;
        case RelationKind::kEmbedding: {
          const double r2 = in_ratio(p, c, 0.0);
          ok = r2 > 0.1 && r2 < 0.9;
          break;
        }
      }
      if (!ok) expected.insert({static_cast<int>(r.kind), r.parent, r.child});
    }
    for (const auto& id : g.floor_supported) {
      const double gap = s.objects[static_cast<std::size_t>(s.find(id))].box.min.z() - s.floor_z;
      if (gap < -0.01 || gap > 0.02) expected.insert({0, kFloorId, id});
    }
    std::set<OracleRel> got;
    for (const auto& v : validate_graph(g, s)) got.insert({static_cast<int>(v.relation.kind), v.relation.parent, v.relation.child});
    EXPECT_EQ(got, expected);
    reported += got.size();
  }
  EXPECT_GT(reported, 0u);
}

}  // namespace
}  // namespace s2s
