#include "dlcz/tia.h"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "gtest/gtest.h"

using namespace dlcz;

namespace {

ClickRecord click(std::uint64_t trial, Channel c, std::uint32_t t) { return {trial, c, t}; }

// Random trial-complete streams with extra dark clicks on every channel.
std::vector<ClickRecord> noisy_stream(std::uint64_t seed, const PulseSchedule& s) {
  ImperfectionModel m;
  m.v_pop = 0.8;
  m.v_coh = 0.6;
  m.alpha = 0.6;
  m.xi = 0.8;
  m.dark_d1 = 0.1;
  m.dark_d2 = 0.2;
  m.dark_d3 = 0.2;
  return run_experiment(m, s, {{0.2, 0.0}, {0.5, 0.0}}, 30000, seed);
}

}  // namespace

TEST(tia, gate_examples) {
  PulseSchedule s;
  EXPECT_TRUE(gate(std::vector<ClickRecord>{}, s).empty());
  std::vector<ClickRecord> ev = {click(0, Channel::kD1, 125)};
  EXPECT_EQ(gate(ev, s).size(), 1u);
  // Idler gate is [155, 295); a click 80 ns past its edge is dropped.
  const auto idler = s.idler_gate();
  ev = {click(0, Channel::kD2, std::uint32_t(idler.hi + 80)), click(0, Channel::kD2, 200),
        click(0, Channel::kD3, std::uint32_t(idler.lo - 2)), click(1, Channel::kD1, 250)};
  auto kept = gate(ev, s);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].time_ns, 200u);
}

TEST(tia, gate_is_idempotent) {
  PulseSchedule s;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint32_t> t(0, 200), ch(1, 3);
  std::vector<ClickRecord> ev;
  for (std::uint64_t k = 0; k < 20000; ++k) ev.push_back({k / 3, Channel(ch(rng)), 2 * t(rng)});
  auto once = gate(ev, s);
  EXPECT_EQ(gate(once, s), once);
  EXPECT_LT(once.size(), ev.size());
}

TEST(tia, match_examples) {
  CoincidenceWindow w{0, 80};
  std::vector<ClickRecord> ev = {click(0, Channel::kD1, 0), click(0, Channel::kD2, 40)};
  auto c = match_coincidences(ev, w);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].delay, 40);
  EXPECT_EQ(c[0].stop_channel, Channel::kD2);

  EXPECT_TRUE(match_coincidences(std::vector<ClickRecord>{click(0, Channel::kD1, 0)}, w).empty());
  EXPECT_TRUE(match_coincidences(std::vector<ClickRecord>{click(0, Channel::kD1, 0), click(0, Channel::kD3, 120)}, w)
                  .empty());
}

TEST(tia, match_tie_breaks) {
  CoincidenceWindow w{0, 200};
  // Earliest stop wins; D2 wins an exact tie.
  std::vector<ClickRecord> ev = {click(0, Channel::kD3, 60), click(0, Channel::kD2, 90), click(0, Channel::kD1, 10),
                                 click(1, Channel::kD1, 10), click(1, Channel::kD3, 50), click(1, Channel::kD2, 50),
                                 click(2, Channel::kD1, 30), click(2, Channel::kD1, 20), click(2, Channel::kD2, 24),
                                 click(3, Channel::kD2, 5), click(3, Channel::kD1, 10)};
  auto c = match_coincidences(ev, w);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].stop_channel, Channel::kD3);
  EXPECT_EQ(c[0].delay, 50);
  EXPECT_EQ(c[1].stop_channel, Channel::kD2);
  EXPECT_EQ(c[1].delay, 40);
  EXPECT_EQ(c[2].start_time, 20);  // earliest D1 starts
  EXPECT_EQ(c[2].delay, 4);
  // Trial 3: the only stop precedes the start.
}

TEST(tia, window_is_half_open) {
  std::vector<ClickRecord> ev = {click(0, Channel::kD1, 0), click(0, Channel::kD2, 80),
                                 click(1, Channel::kD1, 0), click(1, Channel::kD2, 0)};
  auto c = match_coincidences(ev, {0, 80});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].trial_index, 1u);
  EXPECT_THROW(match_coincidences(ev, {10, 10}), std::invalid_argument);
}

TEST(tia, at_most_one_event_per_trial) {
  PulseSchedule s;
  auto ev = gate(noisy_stream(4, s), s);
  auto c = match_coincidences(ev, {-1000, 1000});
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_LT(c[k - 1].trial_index, c[k].trial_index);
}

TEST(tia, partition_property) {
  for (std::int64_t dt : {100, 200}) {
    PulseSchedule s;
    s.delta_t_ns = dt;
    const CoincidenceWindow w = *standard_window(dt);
    auto ev = gate(noisy_stream(5 + dt, s), s);
    auto full = match_coincidences(ev, w);
    std::size_t sum = 0;
    for (const auto& q : split_into_quarters(w)) {
      auto part = match_coincidences(ev, q);
      sum += part.size();
      EXPECT_EQ(part, select(full, q));
    }
    EXPECT_EQ(sum, full.size());
    EXPECT_GT(full.size(), 1000u);
  }
}

TEST(tia, histogram_examples) {
  std::vector<CoincidenceEvent> one = {{0, 0, Channel::kD2, 40, 40}};
  auto h = histogram(one, 2);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.begin()->first, 40);
  EXPECT_EQ(h.begin()->second, 1u);
  EXPECT_TRUE(histogram(std::vector<CoincidenceEvent>{}, 2).empty());
  EXPECT_THROW(histogram(one, 3), std::invalid_argument);
  EXPECT_THROW(histogram(one, 0), std::invalid_argument);
  std::vector<CoincidenceEvent> neg = {{0, 10, Channel::kD2, 7, -3}};
  EXPECT_EQ(histogram(neg, 4).begin()->first, -4);
}

TEST(tia, histogram_uniform_quarters) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d(0, 39);
  const int n = 40000;
  std::vector<CoincidenceEvent> ev;
  for (int k = 0; k < n; ++k) {
    std::int64_t delay = 2 * d(rng);
    ev.push_back({std::uint64_t(k), 0, Channel::kD2, delay, delay});
  }
  auto h = histogram(ev, 20);
  ASSERT_EQ(h.size(), 4u);
  const double mean = n / 4.0, sigma = std::sqrt(n * 0.25 * 0.75);
  for (const auto& [lo, count] : h) EXPECT_NEAR(double(count), mean, 4.0 * sigma);
}

TEST(tia, histogram_total_independent_of_bin_width) {
  PulseSchedule s;
  auto c = match_coincidences(gate(noisy_stream(8, s), s), {-300, 300});
  for (int bin : {2, 4, 6, 20, 64}) {
    auto h = histogram(c, bin);
    std::uint64_t total = 0;
    for (const auto& [lo, n] : h) {
      total += n;
      EXPECT_EQ(lo % bin, 0);
    }
    EXPECT_EQ(total, c.size());
  }
}

TEST(tia, quarters) {
  auto q = split_into_quarters({0, 80});
  EXPECT_EQ(q[0], (CoincidenceWindow{0, 20}));
  EXPECT_EQ(q[3], (CoincidenceWindow{60, 80}));
  q = split_into_quarters({25, 145});
  EXPECT_EQ(q[0], (CoincidenceWindow{25, 55}));
  EXPECT_EQ(q[1], (CoincidenceWindow{55, 85}));
  EXPECT_EQ(q[2], (CoincidenceWindow{85, 115}));
  EXPECT_EQ(q[3], (CoincidenceWindow{115, 145}));
  q = split_into_quarters({0, 8});
  EXPECT_EQ(q[1], (CoincidenceWindow{2, 4}));
  // Width 10 widens to 16.
  q = split_into_quarters({0, 10});
  EXPECT_EQ(q[3], (CoincidenceWindow{12, 16}));
  for (int k = 1; k < 4; ++k) EXPECT_EQ(q[k].lo, q[k - 1].hi);
}

TEST(tia, standard_windows) {
  EXPECT_EQ(*standard_window(100), (CoincidenceWindow{0, 80}));
  EXPECT_EQ(*standard_window(200), (CoincidenceWindow{25, 145}));
  EXPECT_FALSE(standard_window(150).has_value());
}

TEST(tia, coincidence_csv) {
  std::vector<CoincidenceEvent> ev = {{3, 10, Channel::kD3, 50, 40}};
  std::ostringstream out;
  write_coincidences_csv(out, ev);
  EXPECT_EQ(out.str(), std::string(kCoincidenceCsvHeader) + "\n3,10,D3,50,40\n");
}
