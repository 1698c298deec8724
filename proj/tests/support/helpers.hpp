#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "versekit/dsl/check.hpp"
#include "versekit/dsl/parser.hpp"

namespace versekit::testing {

inline std::string scenario_path(const std::string& rel) {
    return std::string(VERSEKIT_SCENARIO_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string> drone_fields() {
    return {"px", "py", "pz", "vx", "vy", "vz"};
}

inline std::vector<std::string> car_fields() { return {"x", "y", "theta", "v"}; }

inline std::set<std::string> layer_modes() {
    return {"T0", "T1", "T2", "M01", "M10", "M12", "M21"};
}

inline dsl::CheckedProgram check_source(const std::string& source,
                                        const std::set<std::string>& modes,
                                        const std::vector<std::string>& fields) {
    return dsl::check(dsl::parse(source), modes, fields);
}

inline dsl::CheckedProgram check_corpus(const std::string& rel,
                                        const std::set<std::string>& modes,
                                        const std::vector<std::string>& fields) {
    return check_source(read_file(scenario_path(rel)), modes, fields);
}

}  // namespace versekit::testing
