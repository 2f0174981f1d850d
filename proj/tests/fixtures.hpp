// Shared test fixtures.
#pragma once

#include "sigdisc/core_model.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

namespace fixtures {

inline sigdisc::ChannelDictionary small_dictionary()
{
    using sigdisc::Mode;
    return sigdisc::ChannelDictionary({{"hb", Mode::Measurement, "g/dL"},
                                       {"icd_a", Mode::Code, ""},
                                       {"statin", Mode::Medication, ""},
                                       {"sex", Mode::Demographic, ""},
                                       {"age", Mode::Demographic, "years"}});
}

inline sigdisc::EventRecord small_record(const std::string& id = "r1")
{
    sigdisc::EventRecord r;
    r.record_id = id;
    r.measurements = {{"hb", 10, 12.0}, {"hb", 400, 13.5}, {"hb", 900, 11.0}};
    r.codes = {{"icd_a", 20}, {"icd_a", 300}, {"icd_a", 310}, {"icd_a", 700}, {"icd_a", 1000}};
    r.med_recons = {{50, {"statin"}}, {600, {}}};
    r.demographics = {{"sex", 1.0}};
    r.age_at_day0 = 61.0;
    return r;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir()
    {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("sigdisc_test_" + std::to_string(getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace fixtures
