#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pisim {

/// `key = value` file with '#' comments. Keeps line numbers for diagnostics
/// and tracks which keys were consumed so unknown keys can be rejected.
class TextKv {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static TextKv parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error(path + ": cannot open");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    static TextKv parse(const std::string& text, const std::string& origin = "<string>") {
        TextKv kv;
        kv.origin_ = origin;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                std::ostringstream os;
                os << origin << ":" << lineno << ": expected 'key = value', got '" << t << "'";
                throw std::runtime_error(os.str());
            }
            const std::string key = trim(t.substr(0, eq));
            const std::string val = trim(t.substr(eq + 1));
            if (key.empty()) {
                std::ostringstream os;
                os << origin << ":" << lineno << ": empty key";
                throw std::runtime_error(os.str());
            }
            if (kv.entries_.count(key)) {
                std::ostringstream os;
                os << origin << ":" << lineno << ": duplicate key '" << key << "'";
                throw std::runtime_error(os.str());
            }
            kv.entries_[key] = {val, lineno};
        }
        return kv;
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end())
            throw std::runtime_error(origin_ + ": missing required key '" + key + "'");
        consumed_.insert(key);
        return it->second.value;
    }

    std::string get_string_or(const std::string& key, const std::string& dflt) {
        if (!has(key)) return dflt;
        return get_string(key);
    }

    double get_number(const std::string& key) {
        const std::string v = get_string(key);
        return parse_number(key, v);
    }

    double get_number_or(const std::string& key, double dflt) {
        if (!has(key)) return dflt;
        return get_number(key);
    }

    bool get_bool_or(const std::string& key, bool dflt) {
        if (!has(key)) return dflt;
        const std::string v = get_string(key);
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        throw std::runtime_error(key_context(key) + ": expected boolean, got '" + v + "'");
    }

    /// Numbers accept plain decimals, scientific notation, and `a/b` rationals
    /// (handy for rates like 1/7200).
    double parse_number(const std::string& key, const std::string& v) const {
        const auto slash = v.find('/');
        try {
            std::size_t pos = 0;
            if (slash != std::string::npos) {
                const double num = std::stod(trim(v.substr(0, slash)), &pos);
                const double den = std::stod(trim(v.substr(slash + 1)));
                if (den == 0.0) throw std::runtime_error("zero denominator");
                return num / den;
            }
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::runtime_error("trailing characters");
            return x;
        } catch (const std::exception&) {
            throw std::runtime_error(key_context(key) + ": expected number, got '" + v + "'");
        }
    }

    /// Keys never consumed by the schema; nonempty means unknown keys.
    std::vector<std::string> unconsumed() const {
        std::vector<std::string> out;
        for (const auto& [k, e] : entries_)
            if (!consumed_.count(k)) out.push_back(k);
        return out;
    }

    void reject_unconsumed() const {
        const auto extra = unconsumed();
        if (extra.empty()) return;
        std::ostringstream os;
        os << origin_ << ": unknown key '" << extra.front() << "' (line "
           << entries_.at(extra.front()).line << ")";
        throw std::runtime_error(os.str());
    }

    int line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }
    const std::string& origin() const { return origin_; }
    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::string key_context(const std::string& key) const {
        std::ostringstream os;
        os << origin_ << ":" << line_of(key) << ": key '" << key << "'";
        return os.str();
    }
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    std::string origin_;
    std::map<std::string, Entry> entries_;
    std::set<std::string> consumed_;
};

}  // namespace pisim
