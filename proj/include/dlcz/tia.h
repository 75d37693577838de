#ifndef DLCZ_TIA_H_
#define DLCZ_TIA_H_

// Start/stop time-interval analysis of gated click streams.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dlcz/simkernel.h"

namespace dlcz {

/// Accepted idler-minus-signal delays, half-open [lo, hi) in ns.
struct CoincidenceWindow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  void validate() const;
  bool contains(std::int64_t delay) const { return delay >= lo && delay < hi; }

  friend bool operator==(const CoincidenceWindow&, const CoincidenceWindow&) = default;
};

/// Windows used for the 100 ns and 200 ns storage delays; nullopt otherwise.
std::optional<CoincidenceWindow> standard_window(std::int64_t delta_t_ns);

struct CoincidenceEvent {
  std::uint64_t trial_index;
  std::int64_t start_time;
  Channel stop_channel;
  std::int64_t stop_time;
  std::int64_t delay;

  friend bool operator==(const CoincidenceEvent&, const CoincidenceEvent&) = default;
};

/// Keeps D1 clicks inside the signal gate and D2/D3 clicks inside the idler
/// gate. Order is preserved.
std::vector<ClickRecord> gate(std::span<const ClickRecord> events, const PulseSchedule& sched);

/// One start/stop measurement per trial. The start is the trial's earliest D1
/// click; the stop is the earliest D2/D3 click at or after it (D2 wins exact
/// ties). The pair is kept when its delay lies in the window. Every click of
/// a trial must be present in `events`. Output is ordered by trial index.
std::vector<CoincidenceEvent> match_coincidences(std::span<const ClickRecord> events,
                                                 const CoincidenceWindow& window);

/// Delay histogram keyed by bin lower edge (floor(delay / bin_ns) * bin_ns).
/// bin_ns must be a positive multiple of 2.
std::map<std::int64_t, std::uint64_t> histogram(std::span<const CoincidenceEvent> events,
                                               int bin_ns = 2);

/// Four contiguous equal sub-windows. When the width is not a multiple of
/// 8 ns, hi is first widened to the next multiple so each quarter stays on
/// the 2 ns grid.
std::array<CoincidenceWindow, 4> split_into_quarters(const CoincidenceWindow& window);

/// Events whose delay lies in `window`.
std::vector<CoincidenceEvent> select(std::span<const CoincidenceEvent> events,
                                     const CoincidenceWindow& window);

inline constexpr const char* kCoincidenceCsvHeader =
    "trial_index,start_time,stop_channel,stop_time,delay";
void write_coincidences_csv(std::ostream& out, std::span<const CoincidenceEvent> events);

}  // namespace dlcz

#endif  // DLCZ_TIA_H_
