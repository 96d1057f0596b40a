#ifndef EXPODELAY_ERRORS_HPP
#define EXPODELAY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace expodelay {

// Exit-code contract: 2 non-contraction, 3 config/usage, 4 numeric, 5 I/O.
struct error : std::runtime_error {
    int exit_code;
    error(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
};

struct config_error : error {
    explicit config_error(const std::string& what) : error(3, what) {}
};

struct non_contraction_error : error {
    explicit non_contraction_error(const std::string& what) : error(2, what) {}
};

struct numeric_error : error {
    explicit numeric_error(const std::string& what) : error(4, what) {}
};

struct io_error : error {
    explicit io_error(const std::string& what) : error(5, what) {}
};

}

#endif
