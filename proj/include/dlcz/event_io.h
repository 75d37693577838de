#ifndef DLCZ_EVENT_IO_H_
#define DLCZ_EVENT_IO_H_

// Event-stream file formats.
//
// CSV:    header "trial_index,channel,time_ns", one click per row, channel
//         written as D1/D2/D3.
// Binary: headerless sequence of 13-byte little-endian records
//         (u64 trial_index, u8 channel in {1,2,3}, u32 time_ns).

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlcz/simkernel.h"

namespace dlcz {

/// Malformed input; the message names the offending row or record.
class DataFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventFormat { kCsv, kBinary };

inline constexpr std::size_t kBinaryRecordSize = 13;
inline constexpr const char* kEventCsvHeader = "trial_index,channel,time_ns";

void write_events_csv(std::ostream& out, std::span<const ClickRecord> events);
std::vector<ClickRecord> read_events_csv(std::istream& in, const std::string& source = "<stream>");

void write_events_binary(std::ostream& out, std::span<const ClickRecord> events);
std::vector<ClickRecord> read_events_binary(std::istream& in,
                                            const std::string& source = "<stream>");

void write_events(const std::filesystem::path& path, std::span<const ClickRecord> events,
                  EventFormat format);
/// Format chosen by extension: ".bin" is binary, anything else CSV.
std::vector<ClickRecord> read_events(const std::filesystem::path& path);
EventFormat format_for_path(const std::filesystem::path& path);

}  // namespace dlcz

#endif  // DLCZ_EVENT_IO_H_
