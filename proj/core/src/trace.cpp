#include "schedlab/trace.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "schedlab/errors.hpp"

namespace schedlab {

const char* trace_event_name(TraceEventKind kind) {
    switch (kind) {
        case TraceEventKind::arrive: return "arrive";
        case TraceEventKind::schedule: return "schedule";
        case TraceEventKind::reject: return "reject";
        case TraceEventKind::preempt: return "preempt";
        case TraceEventKind::resume: return "resume";
        case TraceEventKind::complete: return "complete";
        case TraceEventKind::expire: return "expire";
    }
    return "unknown";
}

TraceEventKind trace_event_from_name(const std::string& name) {
    if (name == "arrive") return TraceEventKind::arrive;
    if (name == "schedule") return TraceEventKind::schedule;
    if (name == "reject") return TraceEventKind::reject;
    if (name == "preempt") return TraceEventKind::preempt;
    if (name == "resume") return TraceEventKind::resume;
    if (name == "complete") return TraceEventKind::complete;
    if (name == "expire") return TraceEventKind::expire;
    throw IoError("trace: unknown event kind '" + name + "'");
}

std::string trace_to_text(const ScheduleTrace& trace) {
    std::ostringstream out;
    out << "schedlab-trace v1\n";
    if (trace.off_event_decisions != 0)
        out << "offevent " << trace.off_event_decisions << "\n";
    for (const TraceAlloc& a : trace.alloc)
        out << "alloc " << a.t << " " << a.server << " " << a.job << "\n";
    for (const TraceEvent& e : trace.events)
        out << "event " << e.t << " " << trace_event_name(e.kind) << " " << e.job << " "
            << e.server << "\n";
    return out.str();
}

ScheduleTrace trace_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "schedlab-trace v1")
        throw IoError("trace: missing or unsupported header: '" + line + "'");
    ScheduleTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "offevent") {
            if (!(ls >> trace.off_event_decisions)) throw IoError("trace: bad offevent line");
        } else if (tag == "alloc") {
            TraceAlloc a;
            if (!(ls >> a.t >> a.server >> a.job)) throw IoError("trace: bad alloc line: " + line);
            trace.alloc.push_back(a);
        } else if (tag == "event") {
            TraceEvent e;
            std::string kind;
            if (!(ls >> e.t >> kind >> e.job >> e.server))
                throw IoError("trace: bad event line: " + line);
            e.kind = trace_event_from_name(kind);
            trace.events.push_back(e);
        } else {
            throw IoError("trace: unknown record '" + tag + "'");
        }
    }
    return trace;
}

void save_trace(const ScheduleTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("trace: cannot open for write: " + path);
    out << trace_to_text(trace);
    if (!out) throw IoError("trace: write failed: " + path);
}

ScheduleTrace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("trace: cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return trace_from_text(buf.str());
}

}  // namespace schedlab
