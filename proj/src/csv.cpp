#include "hfc/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hfc::csv {

namespace {

void put(std::ostream& out, double v, bool last = false) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out << buf << (last ? '\n' : ',');
}

}  // namespace

std::string trace_header() {
  return "t,f_x,f_z,e_x,e_z,du_x,du_z,u_x,u_z,nom_x,nom_z,act_x,act_z,"
         "q1,q2,tau1,tau2";
}

void write_trace(std::ostream& out, const sim::Trace& trace) {
  out << trace_header() << '\n';
  for (const auto& r : trace.rows) {
    put(out, r.t);
    put(out, r.force.x);
    put(out, r.force.z);
    put(out, r.error.x);
    put(out, r.error.z);
    put(out, r.du.x);
    put(out, r.du.z);
    put(out, r.u.x);
    put(out, r.u.z);
    put(out, r.nominal.x);
    put(out, r.nominal.z);
    put(out, r.actual.x);
    put(out, r.actual.z);
    put(out, r.q1);
    put(out, r.q2);
    put(out, r.tau1);
    put(out, r.tau2, true);
  }
}

std::string trace_text(const sim::Trace& trace) {
  std::ostringstream ss;
  write_trace(ss, trace);
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << contents;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
  }
}

}  // namespace hfc::csv
