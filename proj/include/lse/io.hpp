#pragma once

#include <string>

#include "lse/core.hpp"

namespace lse::io {

/// Whole file as a string; throws IoError.
std::string read_file(const std::string& path);

/// Writes to `path.tmp` and renames over `path`. Parent directories are created.
void atomic_write(const std::string& path, const std::string& content);

/// CSV with header `index,re,im`; index is the 1-based sample position.
std::string signal_csv(const Observation& obs);
void write_signal_csv(const std::string& path, const Observation& obs);

/// M <= 0 takes the largest index as M.
Observation parse_signal_csv(const std::string& text, int M);
Observation read_signal_csv(const std::string& path, int M);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace lse::io
