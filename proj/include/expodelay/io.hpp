#ifndef EXPODELAY_IO_HPP
#define EXPODELAY_IO_HPP

#include <map>
#include <string>
#include <vector>

#include "expodelay/grid_function.hpp"

namespace expodelay {

// Writes "t,re_u0,im_u0,..." with 17 significant digits, one row per node,
// atomically (temp file + rename). The digit count makes the round trip
// bit-exact for binary64.
void write_csv(const std::string& path, const GridFunction& f);

// Strict reader for the same format: header checked, column count 1 + 2*dim,
// time column strictly increasing and uniform.
GridFunction read_csv(const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// Sectioned key-value config. Every lookup marks its key consumed; finish()
// rejects whatever was never asked for, so unknown keys cannot pass silently.
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse(const std::string& text, const std::string& origin);

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key);
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback);
    double get_double(const std::string& section, const std::string& key);
    double get_double(const std::string& section, const std::string& key, double fallback);
    int64_t get_int(const std::string& section, const std::string& key, int64_t fallback);
    // Whitespace-separated finite reals.
    std::vector<double> get_doubles(const std::string& section, const std::string& key);

    // Throws naming the first key no getter ever touched.
    void finish() const;

  private:
    struct Entry {
        std::string value;
        mutable bool consumed = false;
    };
    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> sections_;

    const Entry& find(const std::string& section, const std::string& key);
};

}

#endif
