#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

namespace flowvoc {

// Contract violations (bad shapes, invalid configs, misuse).
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Runtime failures (I/O, numerics, corrupt files).
class RuntimeError : public std::runtime_error {
public:
    explicit RuntimeError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
[[noreturn]] inline void throw_contract(const char* expr, const std::string& msg) {
    std::ostringstream os;
    os << "contract violated: " << expr;
    if (!msg.empty()) os << " (" << msg << ")";
    throw ContractError(os.str());
}
}  // namespace detail

#define FV_REQUIRE(cond, msg)                                              \
    do {                                                                   \
        if (!(cond)) ::flowvoc::detail::throw_contract(#cond, (msg));      \
    } while (0)

#define FV_FAIL(msg) throw ::flowvoc::RuntimeError(msg)

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

// Verbosity comes from the FLOWVOC_LOG env var: debug|info|warn|error.
inline LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* env = std::getenv("FLOWVOC_LOG");
        if (!env) return LogLevel::Warn;
        const std::string s(env);
        if (s == "debug") return LogLevel::Debug;
        if (s == "info") return LogLevel::Info;
        if (s == "error") return LogLevel::Error;
        return LogLevel::Warn;
    }();
    return lvl;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
    if (lvl < log_level()) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::fprintf(stderr, "[flowvoc:%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

inline void log_debug(const std::string& m) { log_msg(LogLevel::Debug, m); }
inline void log_info(const std::string& m) { log_msg(LogLevel::Info, m); }
inline void log_warn(const std::string& m) { log_msg(LogLevel::Warn, m); }
inline void log_error(const std::string& m) { log_msg(LogLevel::Error, m); }

}  // namespace flowvoc
