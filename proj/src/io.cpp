#include "expodelay/io.hpp"

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "expodelay/errors.hpp"

namespace expodelay {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_finite(const std::string& s, const std::string& where) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw config_error(where + ": '" + s + "' is not a finite number");
    return v;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out) throw io_error("write to '" + tmp + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw io_error("cannot move '" + tmp + "' to '" + path + "'");
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_csv(const std::string& path, const GridFunction& f) {
    std::string out;
    out.reserve(static_cast<size_t>(f.grid.n) * (32 + 48 * static_cast<size_t>(f.dim)));
    out += "t";
    for (int c = 0; c < f.dim; ++c) {
        char head[48];
        std::snprintf(head, sizeof head, ",re_u%d,im_u%d", c, c);
        out += head;
    }
    out += "\n";
    char cell[64];
    for (int64_t j = 0; j < f.grid.n; ++j) {
        std::snprintf(cell, sizeof cell, "%.17g", f.grid.t(j));
        out += cell;
        for (int c = 0; c < f.dim; ++c) {
            const auto v = f.samples(j, c);
            std::snprintf(cell, sizeof cell, ",%.17g,%.17g", v.real(), v.imag());
            out += cell;
        }
        out += "\n";
    }
    write_text_atomic(path, out);
}

GridFunction read_csv(const std::string& path) {
    const std::string text = read_text(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw io_error("'" + path + "' is empty");

    // Header fixes the state dimension.
    line = trim(line);
    int dim = 0;
    {
        std::istringstream hs(line);
        std::string col;
        if (!std::getline(hs, col, ',') || col != "t")
            throw io_error("'" + path + "': header must start with 't'");
        std::string want_re, want_im;
        while (std::getline(hs, col, ',')) {
            char re[32], im[32];
            std::snprintf(re, sizeof re, "re_u%d", dim);
            std::snprintf(im, sizeof im, "im_u%d", dim);
            if (col != re) throw io_error("'" + path + "': unexpected column '" + col + "'");
            if (!std::getline(hs, col, ',') || col != im)
                throw io_error("'" + path + "': column 're_u" + std::to_string(dim) +
                               "' has no imaginary partner");
            ++dim;
        }
    }
    if (dim < 1) throw io_error("'" + path + "': no state columns");

    std::vector<double> times;
    std::vector<std::complex<double>> flat;
    int64_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream rs(line);
        std::string cell;
        const std::string where = "'" + path + "' row " + std::to_string(row);
        if (!std::getline(rs, cell, ',')) throw io_error(where + ": missing time");
        double t;
        try {
            t = parse_finite(trim(cell), where);
        } catch (const config_error& e) {
            throw io_error(e.what());
        }
        if (!times.empty() && !(t > times.back()))
            throw io_error(where + ": time column must be strictly increasing");
        times.push_back(t);
        for (int c = 0; c < dim; ++c) {
            double re, im;
            try {
                if (!std::getline(rs, cell, ',')) throw io_error(where + ": too few columns");
                re = parse_finite(trim(cell), where);
                if (!std::getline(rs, cell, ',')) throw io_error(where + ": too few columns");
                im = parse_finite(trim(cell), where);
            } catch (const config_error& e) {
                throw io_error(e.what());
            }
            flat.emplace_back(re, im);
        }
        if (std::getline(rs, cell, ',')) throw io_error(where + ": too many columns");
    }
    const auto n = static_cast<int64_t>(times.size());
    if (n < 2) throw io_error("'" + path + "': need at least two rows");

    TimeGrid grid(times.front(), times.back(), n);
    const double dt = grid.dt();
    for (int64_t j = 0; j < n; ++j)
        if (std::abs(times[static_cast<size_t>(j)] - grid.t(j)) > dt / 4)
            throw io_error("'" + path + "': time column is not uniform");

    GridFunction f(grid, dim);
    for (int64_t j = 0; j < n; ++j)
        for (int c = 0; c < dim; ++c)
            f.samples(j, c) = flat[static_cast<size_t>(j) * dim + c];
    return f;
}

Config Config::parse_file(const std::string& path) {
    return parse(read_text(path), path);
}

Config Config::parse(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int64_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + " line " + std::to_string(row);
        if (line.front() == '[') {
            if (line.back() != ']') throw config_error(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw config_error(where + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error(where + ": empty key");
        if (section.empty()) throw config_error(where + ": key '" + key + "' outside any section");
        auto& sec = cfg.sections_[section];
        if (sec.count(key))
            throw config_error(where + ": duplicate key '" + key + "' in [" + section + "]");
        sec[key] = Entry{value};
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

const Config::Entry& Config::find(const std::string& section, const std::string& key) {
    const auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
        throw config_error(origin_ + ": missing key '" + key + "' in [" + section + "]");
    const Entry& e = s->second.at(key);
    e.consumed = true;
    return e;
}

std::string Config::get_string(const std::string& section, const std::string& key) {
    return find(section, key).value;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) {
    return has(section, key) ? find(section, key).value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) {
    return parse_finite(find(section, key).value,
                        origin_ + ": [" + section + "] " + key);
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) {
    return has(section, key) ? get_double(section, key) : fallback;
}

int64_t Config::get_int(const std::string& section, const std::string& key, int64_t fallback) {
    if (!has(section, key)) return fallback;
    const double v = get_double(section, key);
    const auto i = static_cast<int64_t>(std::llround(v));
    if (static_cast<double>(i) != v)
        throw config_error(origin_ + ": [" + section + "] " + key + " must be an integer");
    return i;
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key) {
    std::istringstream in(find(section, key).value);
    std::vector<double> out;
    std::string tok;
    while (in >> tok)
        out.push_back(parse_finite(tok, origin_ + ": [" + section + "] " + key));
    if (out.empty())
        throw config_error(origin_ + ": [" + section + "] " + key + " must list numbers");
    return out;
}

void Config::finish() const {
    for (const auto& [section, keys] : sections_)
        for (const auto& [key, entry] : keys)
            if (!entry.consumed)
                throw config_error(origin_ + ": unknown key '" + key + "' in [" + section + "]");
}

}
