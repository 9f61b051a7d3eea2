#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "mfhawkes/model.hpp"
#include "mfhawkes/random.hpp"

namespace mfh::test
{
inline ModelSpec sigmoid(double gamma, double beta)
{
    std::array<double, 2> p{gamma, beta};
    return builtin_model(BuiltinFamily::sigmoid_erlang, p);
}

inline ModelSpec constant(double c, double beta = 2.0)
{
    std::array<double, 2> p{c, beta};
    return builtin_model(BuiltinFamily::constant_rate, p);
}

inline ModelSpec linear_toy(double a, double c)
{
    std::array<double, 2> p{a, c};
    return builtin_model(BuiltinFamily::linear_toy, p);
}

inline SeedPolicy seed(std::uint64_t s)
{
    SeedPolicy p;
    p.master_seed = s;
    return p;
}

//! Fresh empty directory under the system temp dir
inline std::filesystem::path scratch_dir(std::string const& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("mfhawkes_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}
}  // namespace mfh::test
