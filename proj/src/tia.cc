#include "dlcz/tia.h"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace dlcz {

void CoincidenceWindow::validate() const {
  if (!(lo < hi)) {
    throw std::invalid_argument("coincidence window needs lo < hi");
  }
}

std::optional<CoincidenceWindow> standard_window(std::int64_t delta_t_ns) {
  if (delta_t_ns == 100) return CoincidenceWindow{0, 80};
  if (delta_t_ns == 200) return CoincidenceWindow{25, 145};
  return std::nullopt;
}

std::vector<ClickRecord> gate(std::span<const ClickRecord> events, const PulseSchedule& sched) {
  const GateInterval signal = sched.signal_gate();
  const GateInterval idler = sched.idler_gate();
  std::vector<ClickRecord> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    const GateInterval& g = e.channel == Channel::kD1 ? signal : idler;
    if (g.contains(e.time_ns)) out.push_back(e);
  }
  return out;
}

std::vector<CoincidenceEvent> match_coincidences(std::span<const ClickRecord> events,
                                                 const CoincidenceWindow& window) {
  window.validate();
  std::vector<ClickRecord> sorted(events.begin(), events.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const ClickRecord& a, const ClickRecord& b) {
    return a.trial_index < b.trial_index;
  });

  std::vector<CoincidenceEvent> out;
  auto it = sorted.begin();
  while (it != sorted.end()) {
    auto end = std::find_if(it, sorted.end(), [&](const ClickRecord& r) {
      return r.trial_index != it->trial_index;
    });
    const ClickRecord* start = nullptr;
    for (auto r = it; r != end; ++r) {
      if (r->channel == Channel::kD1 && (!start || r->time_ns < start->time_ns)) start = &*r;
    }
    if (start) {
      const ClickRecord* stop = nullptr;
      for (auto r = it; r != end; ++r) {
        if (r->channel == Channel::kD1 || r->time_ns < start->time_ns) continue;
        if (!stop || r->time_ns < stop->time_ns ||
            (r->time_ns == stop->time_ns && r->channel == Channel::kD2)) {
          stop = &*r;
        }
      }
      if (stop) {
        std::int64_t delay = std::int64_t(stop->time_ns) - std::int64_t(start->time_ns);
        if (window.contains(delay)) {
          out.push_back({start->trial_index, start->time_ns, stop->channel, stop->time_ns, delay});
        }
      }
    }
    it = end;
  }
  return out;
}

std::map<std::int64_t, std::uint64_t> histogram(std::span<const CoincidenceEvent> events,
                                               int bin_ns) {
  if (bin_ns < 2 || bin_ns % 2 != 0) {
    throw std::invalid_argument("histogram bin width must be a positive multiple of 2 ns");
  }
  std::map<std::int64_t, std::uint64_t> bins;
  for (const auto& e : events) {
    std::int64_t q = e.delay / bin_ns;
    if (e.delay % bin_ns != 0 && e.delay < 0) --q;
    ++bins[q * bin_ns];
  }
  return bins;
}

std::array<CoincidenceWindow, 4> split_into_quarters(const CoincidenceWindow& window) {
  window.validate();
  std::int64_t width = window.hi - window.lo;
  if (width % 8 != 0) width += 8 - width % 8;
  const std::int64_t step = width / 4;
  std::array<CoincidenceWindow, 4> out;
  for (int k = 0; k < 4; ++k) {
    out[k] = {window.lo + k * step, window.lo + (k + 1) * step};
  }
  return out;
}

std::vector<CoincidenceEvent> select(std::span<const CoincidenceEvent> events,
                                     const CoincidenceWindow& window) {
  std::vector<CoincidenceEvent> out;
  for (const auto& e : events) {
    if (window.contains(e.delay)) out.push_back(e);
  }
  return out;
}

void write_coincidences_csv(std::ostream& out, std::span<const CoincidenceEvent> events) {
  out << kCoincidenceCsvHeader << '\n';
  for (const auto& e : events) {
    out << e.trial_index << ',' << e.start_time << ',' << channel_name(e.stop_channel) << ','
        << e.stop_time << ',' << e.delay << '\n';
  }
}

}  // namespace dlcz
