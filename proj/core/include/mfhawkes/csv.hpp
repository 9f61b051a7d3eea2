#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mfhawkes/model.hpp"

namespace mfh
{
//! %.17g-style text for a double; round-trips exactly
std::string format_double(double value);

//! Minimal comma-separated writer; fields are never quoted
class CsvWriter
{
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    CsvWriter& operator<<(double value);
    CsvWriter& operator<<(std::string_view value);
    CsvWriter& operator<<(char const* value) { return *this << std::string_view(value); }
    CsvWriter& operator<<(std::uint64_t value);
    CsvWriter& operator<<(std::int64_t value);
    CsvWriter& operator<<(unsigned value) { return *this << std::uint64_t(value); }
    CsvWriter& operator<<(int value) { return *this << std::int64_t(value); }
    void end_row();
    void header(std::vector<std::string> const& columns);

  private:
    std::ostream& os_;
    bool first_ = true;
    void separator();
};

//! Columns replicate,class,unit,jump_time
void write_event_paths_header(std::ostream& os);
void write_event_paths(std::ostream& os, EventPaths const& events, std::uint64_t replicate);

//! Read rows of one replicate back; units with no events are not recoverable
EventPaths read_event_paths(std::istream& is, TimeGrid const& grid,
                            std::size_t units, std::uint64_t replicate);

//! Columns t,<names...>
void write_grid_functions(std::ostream& os,
                          std::vector<std::string> const& names,
                          std::vector<GridFunction const*> const& functions);

using Metadata = std::vector<std::pair<std::string, std::string>>;

//! Plain "key: value" lines
void write_metadata(std::filesystem::path const& path, Metadata const& meta);

//! Create the directory and open a file, throwing on failure
std::ofstream open_output(std::filesystem::path const& path);

}  // namespace mfh
