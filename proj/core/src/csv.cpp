#include "mfhawkes/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfh
{
std::string format_double(double value)
{
    char buf[64];
    auto const res = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void CsvWriter::separator()
{
    if (!first_)
        os_ << ',';
    first_ = false;
}

CsvWriter& CsvWriter::operator<<(double value)
{
    separator();
    os_ << format_double(value);
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view value)
{
    separator();
    os_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::uint64_t value)
{
    separator();
    os_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::int64_t value)
{
    separator();
    os_ << value;
    return *this;
}

void CsvWriter::end_row()
{
    os_ << '\n';
    first_ = true;
}

void CsvWriter::header(std::vector<std::string> const& columns)
{
    for (auto const& c : columns)
        *this << std::string_view(c);
    end_row();
}

void write_event_paths_header(std::ostream& os)
{
    os << "replicate,class,unit,jump_time\n";
}

void write_event_paths(std::ostream& os, EventPaths const& events, std::uint64_t replicate)
{
    CsvWriter w(os);
    for (std::size_t u = 0; u < events.times.size(); ++u)
    {
        std::uint64_t const cls = u < events.unit_class.size() ? events.unit_class[u] : 0;
        for (double t : events.times[u])
        {
            w << replicate << cls << std::uint64_t(u) << t;
            w.end_row();
        }
    }
}

EventPaths read_event_paths(std::istream& is, TimeGrid const& grid,
                            std::size_t units, std::uint64_t replicate)
{
    EventPaths out(grid, units);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty() || line.rfind("replicate", 0) == 0)
            continue;
        std::istringstream ss(line);
        std::string field[4];
        for (auto& f : field)
            if (!std::getline(ss, f, ','))
                throw std::runtime_error("read_event_paths: short row at line "
                                         + std::to_string(lineno));
        if (std::stoull(field[0]) != replicate)
            continue;
        auto const unit = std::stoull(field[2]);
        if (unit >= units)
            throw std::runtime_error("read_event_paths: unit index out of range at line "
                                     + std::to_string(lineno));
        double t = 0;
        auto const& tf = field[3];
        auto const res = std::from_chars(tf.data(), tf.data() + tf.size(), t);
        if (res.ec != std::errc{})
            throw std::runtime_error("read_event_paths: bad time at line "
                                     + std::to_string(lineno));
        out.unit_class[unit] = static_cast<std::uint32_t>(std::stoul(field[1]));
        out.times[unit].push_back(t);
    }
    return out;
}

void write_grid_functions(std::ostream& os,
                          std::vector<std::string> const& names,
                          std::vector<GridFunction const*> const& functions)
{
    if (names.size() != functions.size() || functions.empty())
        throw std::invalid_argument("write_grid_functions: one name per function");
    auto const& grid = functions.front()->grid;
    for (auto const* f : functions)
        require_same_grid(f->grid, grid, "write_grid_functions");
    CsvWriter w(os);
    std::vector<std::string> header{"t"};
    header.insert(header.end(), names.begin(), names.end());
    w.header(header);
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        w << grid.time(k);
        for (auto const* f : functions)
            w << (*f)[k];
        w.end_row();
    }
}

void write_metadata(std::filesystem::path const& path, Metadata const& meta)
{
    auto os = open_output(path);
    for (auto const& [k, v] : meta)
        os << k << ": " << v << '\n';
}

std::ofstream open_output(std::filesystem::path const& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return os;
}

}  // namespace mfh
