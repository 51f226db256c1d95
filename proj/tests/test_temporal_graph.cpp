#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "dwlkit/generators.hpp"
#include "dwlkit/temporal_graph.hpp"

using namespace dwlkit;

namespace {

DynamicGraph from_text(const std::string& text, EventFormat f = EventFormat::edge_list) {
  std::istringstream in(text);
  return load_events(in, f);
}

std::vector<double> finite_prefix(const std::vector<double>& row) {
  std::vector<double> out;
  for (double x : row) {
    if (std::isfinite(x)) out.push_back(x);
  }
  return out;
}

}  // namespace

TEST(LoadEvents, EmptyInput) {
  const DynamicGraph g = from_text("");
  EXPECT_EQ(g.events().size(), 0u);
  EXPECT_EQ(g.node_count(), 0u);
}

TEST(LoadEvents, CommaSeparatedEdgeList) {
  const DynamicGraph g = from_text("0,1,5.0\n1,2,6.0\n");
  ASSERT_EQ(g.events().size(), 2u);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.node_features().rows(), 3);
  EXPECT_TRUE((g.node_features().array() == 0.0).all());
  EXPECT_TRUE((g.edge_feature(g.events()[0]).array() == 0.0).all());
}

TEST(LoadEvents, WhitespaceEdgeListSortsStably) {
  const DynamicGraph g = from_text("2 3 7\n0 1 5\n4 5 5\n");
  ASSERT_EQ(g.events().size(), 3u);
  EXPECT_EQ(g.events()[0].src, 0u);
  EXPECT_EQ(g.events()[1].src, 4u);
  EXPECT_EQ(g.events()[2].src, 2u);
}

TEST(LoadEvents, JodieFixtureMatchesLineParser) {
  const std::string path = std::string(DWLKIT_FIXTURES) + "/jodie10.csv";
  const DynamicGraph g = load_events_file(path, EventFormat::jodie_csv);
  ASSERT_EQ(g.edge_features().rows(), 10);
  ASSERT_EQ(g.edge_features().cols(), 4);
  EXPECT_EQ(g.node_count(), 10u);

  // independent reading: split each data line on commas
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  ASSERT_EQ(rows.size(), 10u);
  for (const Event& e : g.events()) {
    const auto& r = rows[*e.edge_feature_index];
    EXPECT_EQ(e.src, static_cast<NodeId>(r[0]));
    EXPECT_EQ(e.dst, static_cast<NodeId>(r[1]));
    EXPECT_EQ(e.time, r[2]);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(g.edge_feature(e)(k), r[4 + static_cast<std::size_t>(k)]);
  }
  for (std::size_t i = 1; i < g.events().size(); ++i) EXPECT_LE(g.events()[i - 1].time, g.events()[i].time);
}

TEST(LoadEvents, MalformedRowsReportLine) {
  try {
    from_text("0 1 2\n0 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(from_text("0 1 abc\n"), ParseError);
  EXPECT_THROW(from_text("0 1 -3\n"), ParseError);
  EXPECT_THROW(from_text("0 99999999999 1\n"), ParseError);
  EXPECT_THROW(from_text("0 4294967295 1\n"), ParseError);
  EXPECT_THROW(from_text("h\n0,1,1,0,0.5\n0,1,2,0\n", EventFormat::jodie_csv), ParseError);
}

TEST(LoadEvents, EdgeListRoundTrip) {
  const DynamicGraph g(7, {{0, 1, 0.1, std::nullopt}, {2, 1, 1.0 / 3.0, std::nullopt}});
  std::stringstream ss;
  write_edge_list(ss, g);
  const DynamicGraph h = load_events(ss, EventFormat::edge_list);
  EXPECT_EQ(h.node_count(), 7u);
  ASSERT_EQ(h.events().size(), 2u);
  EXPECT_EQ(h.events()[1].time, 1.0 / 3.0);
}

TEST(DynamicGraph, RejectsInvalidEvents) {
  EXPECT_THROW(DynamicGraph(2, {{0, 2, 1.0, std::nullopt}}), std::invalid_argument);
  EXPECT_THROW(DynamicGraph(2, {{0, 1, kInf, std::nullopt}}), std::invalid_argument);
  EXPECT_THROW(DynamicGraph(2, {{0, 1, -1.0, std::nullopt}}), std::invalid_argument);
}

TEST(DynamicGraph, SelfLoopIndexedOnce) {
  const DynamicGraph g(2, {{1, 1, 1.0, std::nullopt}, {0, 1, 2.0, std::nullopt}});
  EXPECT_EQ(g.incidences(1).size(), 2u);
  EXPECT_EQ(g.incidences(0).size(), 1u);
}

TEST(Dat, SpecExample) {
  const DynamicGraph g(4, {{1, 2, 5.0, std::nullopt}, {1, 2, 7.0, std::nullopt}, {2, 3, 6.0, std::nullopt}});
  const Dat dat = build_dat(g);
  EXPECT_EQ(dat.pair_count(), 2u);
  EXPECT_EQ(dat.depth(), 2u);
  const auto s12 = dat.timestamps(2, 1);
  EXPECT_EQ(std::vector<double>(s12.begin(), s12.end()), (std::vector<double>{5.0, 7.0}));
  const auto s23 = dat.timestamps(2, 3);
  EXPECT_EQ(std::vector<double>(s23.begin(), s23.end()), (std::vector<double>{6.0}));
  EXPECT_EQ(dat.count(0, 1), 0u);
}

TEST(Dat, EmptyGraph) {
  const Dat dat = build_dat(DynamicGraph(3, {}));
  EXPECT_EQ(dat.pair_count(), 0u);
  EXPECT_EQ(dat.depth(), 0u);
}

TEST(Dat, CountsSumToEventCount) {
  const DynamicGraph g = random_dynamic_graph(6, 50, 10.0, 3);
  const Dat dat = build_dat(g);
  std::size_t total = 0;
  std::size_t deepest = 0;
  for (const auto& [key, seq] : dat.pairs()) {
    total += seq.size();
    deepest = std::max(deepest, seq.size());
    EXPECT_TRUE(std::is_sorted(seq.begin(), seq.end()));
  }
  EXPECT_EQ(total, 50u);
  EXPECT_EQ(dat.depth(), deepest);
  for (const Event& e : g.events()) {
    const auto s = dat.timestamps(e.src, e.dst);
    EXPECT_NE(std::find(s.begin(), s.end(), e.time), s.end());
  }
}

TEST(Dat, EqualTimestampsKeepMultiplicity) {
  const Dat dat(DynamicGraph(2, {{0, 1, 3.0, std::nullopt}, {1, 0, 3.0, std::nullopt}}));
  EXPECT_EQ(dat.count(0, 1), 2u);
}

TEST(Hdat, SpecExamples) {
  const DynamicGraph g(4, {{1, 2, 5.0, std::nullopt}, {1, 2, 7.0, std::nullopt}, {2, 3, 6.0, std::nullopt}});
  const Dat dat(g);
  EXPECT_EQ(hdat_at(dat, 1, 2, 6.5), (std::vector<double>{5.0, kInf}));
  EXPECT_EQ(hdat_at(dat, 0, 3, 6.5), (std::vector<double>{kInf, kInf}));
  EXPECT_EQ(hdat_at(dat, 1, 2, 7.0), (std::vector<double>{5.0, kInf}));
  EXPECT_EQ(tit_at(dat, 1, 2, 6.5), (std::vector<double>{1.5, kInf}));
  EXPECT_EQ(tit_at(dat, 0, 3, 6.5), (std::vector<double>{kInf, kInf}));
}

TEST(Hdat, PaddingMonotonicityAndBijection) {
  const DynamicGraph g = random_dynamic_graph(5, 40, 10.0, 8);
  const Dat dat(g);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> time(0.0, 11.0);
  for (int trial = 0; trial < 200; ++trial) {
    const NodeId u = static_cast<NodeId>(rng() % 5);
    const NodeId v = static_cast<NodeId>(rng() % 5);
    double t1 = time(rng);
    double t2 = time(rng);
    if (t1 > t2) std::swap(t1, t2);
    const auto h1 = hdat_at(dat, u, v, t1);
    const auto h2 = hdat_at(dat, u, v, t2);
    ASSERT_EQ(h1.size(), dat.depth());
    const auto stored = dat.timestamps(u, v);
    const auto expected = static_cast<std::size_t>(std::count_if(stored.begin(), stored.end(), [&](double s) { return s < t1; }));
    EXPECT_EQ(finite_prefix(h1).size(), expected);
    const auto f1 = finite_prefix(h1);
    const auto f2 = finite_prefix(h2);
    EXPECT_TRUE(std::includes(f2.begin(), f2.end(), f1.begin(), f1.end()));
    const auto tit = tit_at(dat, u, v, t1);
    for (std::size_t k = 0; k < h1.size(); ++k) {
      if (std::isfinite(h1[k])) {
        // one rounding in each direction
        EXPECT_LE(std::abs((t1 - tit[k]) - h1[k]), 2.0 * std::numeric_limits<double>::epsilon() * t1);
        EXPECT_GT(tit[k], 0.0);
      } else {
        EXPECT_EQ(tit[k], kInf);
      }
    }
  }
}

TEST(Hdat, ExactBijectionOnDyadicGrid) {
  std::mt19937_64 rng(6);
  std::vector<Event> events;
  for (int i = 0; i < 60; ++i) {
    const NodeId a = static_cast<NodeId>(rng() % 5);
    const NodeId b = static_cast<NodeId>((a + 1 + rng() % 4) % 5);
    events.push_back({a, b, static_cast<double>(rng() % 800) / 8.0, std::nullopt});
  }
  const Dat dat(DynamicGraph(5, std::move(events)));
  for (double t : {0.125, 13.5, 50.0, 99.875, 120.0}) {
    for (NodeId u = 0; u < 5; ++u) {
      for (NodeId v = 0; v < 5; ++v) {
        const auto h = hdat_at(dat, u, v, t);
        const auto b = tit_at(dat, u, v, t);
        for (std::size_t k = 0; k < h.size(); ++k) {
          if (!std::isfinite(h[k])) continue;
          EXPECT_EQ(t - b[k], h[k]);
          EXPECT_EQ(t - h[k], b[k]);
        }
      }
    }
  }
}

TEST(HistoricalNeighbors, SpecExamples) {
  const DynamicGraph g(3, {{0, 1, 1.0, std::nullopt}, {2, 0, 2.0, std::nullopt}});
  const auto h = historical_neighbors(g, 0, 3.0, 32);
  ASSERT_EQ(h.entries.size(), 2u);
  EXPECT_EQ(h.entries[0].neighbor, 1u);
  EXPECT_EQ(h.entries[0].time, 1.0);
  EXPECT_EQ(h.entries[1].neighbor, 2u);
  EXPECT_EQ(h.entries[1].time, 2.0);
  EXPECT_TRUE(historical_neighbors(g, 0, 1.0, 32).entries.empty());
}

TEST(HistoricalNeighbors, TruncatesToMostRecent) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> time(0.0, 100.0);
  std::vector<Event> events;
  std::vector<double> times;
  for (int i = 0; i < 100; ++i) {
    const double t = time(rng);
    times.push_back(t);
    events.push_back({0, static_cast<NodeId>(1 + i % 7), t, std::nullopt});
  }
  events.push_back({3, 4, 50.0, std::nullopt});
  const DynamicGraph g(8, std::move(events));
  const auto h = historical_neighbors(g, 0, 1000.0, 16);
  std::sort(times.begin(), times.end());
  ASSERT_EQ(h.entries.size(), 16u);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(h.entries[k].time, times[84 + k]);
  for (const auto& e : h.entries) {
    const Event& ev = g.events()[e.event];
    EXPECT_TRUE(ev.src == 0 || ev.dst == 0);
  }
}
