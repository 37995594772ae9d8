#include "schedlab/scenario_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace schedlab {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

double parse_real(const std::string& tok, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw IoError(std::string("scenario: bad real for ") + what + ": '" + tok + "'");
    return v;
}

long long parse_int(const std::string& tok, const char* what) {
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
        throw IoError(std::string("scenario: bad integer for ") + what + ": '" + tok + "'");
    return v;
}

std::string next_token(std::istringstream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw IoError(std::string("scenario: missing field ") + what);
    return tok;
}

}  // namespace

std::string scenario_to_text(const Scenario& s) {
    std::ostringstream out;
    out << "schedlab-scenario v1\n";
    out << "types " << s.num_types << "\n";
    out << "horizon " << s.t_min << " " << s.t_max << "\n";
    out << "servers " << s.num_servers() << "\n";
    for (const Server& srv : s.servers) {
        out << "server " << srv.id;
        for (double e : srv.eta) out << " " << format_real(e);
        out << "\n";
    }
    out << "jobs " << s.num_jobs() << "\n";
    for (const Job& j : s.jobs) {
        out << "job " << j.id << " " << j.arrival << " " << j.deadline << " " << j.proc_time
            << " " << format_real(j.value) << " " << j.jtype;
        for (double p : j.pref) out << " " << format_real(p);
        out << "\n";
    }
    return out.str();
}

Scenario scenario_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "schedlab-scenario v1")
        throw IoError("scenario: missing or unsupported header: '" + line + "'");

    Scenario s;
    auto expect_line = [&](const char* what) {
        if (!std::getline(in, line)) throw IoError(std::string("scenario: truncated before ") + what);
        return std::istringstream(line);
    };

    {
        auto ls = expect_line("types");
        if (next_token(ls, "types keyword") != "types") throw IoError("scenario: expected 'types'");
        s.num_types = static_cast<int>(parse_int(next_token(ls, "types"), "types"));
    }
    {
        auto ls = expect_line("horizon");
        if (next_token(ls, "horizon keyword") != "horizon")
            throw IoError("scenario: expected 'horizon'");
        s.t_min = parse_int(next_token(ls, "t_min"), "t_min");
        s.t_max = parse_int(next_token(ls, "t_max"), "t_max");
    }
    int num_servers = 0;
    {
        auto ls = expect_line("servers");
        if (next_token(ls, "servers keyword") != "servers")
            throw IoError("scenario: expected 'servers'");
        num_servers = static_cast<int>(parse_int(next_token(ls, "servers"), "servers"));
    }
    for (int i = 0; i < num_servers; ++i) {
        auto ls = expect_line("server row");
        if (next_token(ls, "server keyword") != "server")
            throw IoError("scenario: expected 'server'");
        Server srv;
        srv.id = static_cast<int>(parse_int(next_token(ls, "server id"), "server id"));
        for (int ty = 0; ty < s.num_types; ++ty)
            srv.eta.push_back(parse_real(next_token(ls, "eta"), "eta"));
        s.servers.push_back(std::move(srv));
    }
    int num_jobs = 0;
    {
        auto ls = expect_line("jobs");
        if (next_token(ls, "jobs keyword") != "jobs") throw IoError("scenario: expected 'jobs'");
        num_jobs = static_cast<int>(parse_int(next_token(ls, "jobs"), "jobs"));
    }
    for (int j = 0; j < num_jobs; ++j) {
        auto ls = expect_line("job row");
        if (next_token(ls, "job keyword") != "job") throw IoError("scenario: expected 'job'");
        Job job;
        job.id = static_cast<int>(parse_int(next_token(ls, "job id"), "job id"));
        job.arrival = parse_int(next_token(ls, "arrival"), "arrival");
        job.deadline = parse_int(next_token(ls, "deadline"), "deadline");
        job.proc_time = static_cast<int>(parse_int(next_token(ls, "proc_time"), "proc_time"));
        job.value = parse_real(next_token(ls, "value"), "value");
        job.jtype = static_cast<int>(parse_int(next_token(ls, "type"), "type"));
        for (int i = 0; i < num_servers; ++i)
            job.pref.push_back(parse_real(next_token(ls, "pref"), "pref"));
        s.jobs.push_back(std::move(job));
    }
    s.validate();
    return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("scenario: cannot open for write: " + path);
    out << scenario_to_text(s);
    if (!out) throw IoError("scenario: write failed: " + path);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("scenario: cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_text(buf.str());
}

}  // namespace schedlab
