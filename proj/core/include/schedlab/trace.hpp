#pragma once

#include <string>
#include <vector>

#include "schedlab/model.hpp"

namespace schedlab {

enum class TraceEventKind { arrive, schedule, reject, preempt, resume, complete, expire };

const char* trace_event_name(TraceEventKind kind);
TraceEventKind trace_event_from_name(const std::string& name);

struct TraceAlloc {
    Time t = 0;
    int server = 0;
    int job = 0;
};

struct TraceEvent {
    Time t = 0;
    TraceEventKind kind = TraceEventKind::arrive;
    int job = -1;
    int server = -1;  // -1 when the event has no server

    bool operator==(const TraceEvent&) const = default;
};

// Per-timestep allocations plus the chronological decision/event log. Shared
// by the simulator and the offline solver so one extraction path consumes
// both. `off_event_decisions` counts schedule/resume/preempt decisions that
// fall outside arrival/completion times (always 0 for simulator traces).
struct ScheduleTrace {
    std::vector<TraceAlloc> alloc;
    std::vector<TraceEvent> events;
    int off_event_decisions = 0;
};

// Columnar text format, header "schedlab-trace v1":
//   alloc <t> <server> <job>
//   event <t> <kind> <job> <server>
std::string trace_to_text(const ScheduleTrace& trace);
ScheduleTrace trace_from_text(const std::string& text);
void save_trace(const ScheduleTrace& trace, const std::string& path);
ScheduleTrace load_trace(const std::string& path);

}  // namespace schedlab
