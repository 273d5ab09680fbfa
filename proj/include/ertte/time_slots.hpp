#pragma once

#include <cstdint>

namespace ertte {

inline constexpr int kMinutesPerWeek = 7 * 24 * 60;

// Number of weekly slots for a ΔT-minute grid.
inline int slots_per_week(int slot_minutes) { return kMinutesPerWeek / slot_minutes; }

// Index of the ΔT-minute slot containing `epoch_s`, counted from Monday 00:00
// UTC. The Unix epoch fell on a Thursday.
inline int weekly_slot(std::int64_t epoch_s, int slot_minutes) {
  std::int64_t minutes = epoch_s / 60;
  std::int64_t since_monday = (minutes + 3 * 24 * 60) % kMinutesPerWeek;
  if (since_monday < 0) since_monday += kMinutesPerWeek;
  return static_cast<int>(since_monday / slot_minutes);
}

// Slot index shifted back by `back` slots, wrapping around the week.
inline int shifted_slot(int slot, int back, int slot_minutes) {
  const int n = slots_per_week(slot_minutes);
  int s = (slot - back) % n;
  if (s < 0) s += n;
  return s;
}

}  // namespace ertte
