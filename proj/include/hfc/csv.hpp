#pragma once

// Trace and table output.

#include <ostream>
#include <string>

#include "hfc/sim.hpp"

namespace hfc::csv {

/// Header of a trace file, one column per TraceRow field.
std::string trace_header();

void write_trace(std::ostream& out, const sim::Trace& trace);

/// Writes through a sibling temp file and renames it into place, so a
/// reader never sees a partial file. Throws std::runtime_error on failure.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string trace_text(const sim::Trace& trace);

}  // namespace hfc::csv
