#pragma once

// Minimal reader/writer for the structured-text documents used across the tool:
// system configs, sweep specs, model files and constraint exports. The grammar is
// a small TOML subset: [section] headers, [[section]] array-of-table headers,
// `key = value` pairs with string/number/boolean/array values, and # comments.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gridfreq {

struct DocValue {
    enum class Kind { string, number, boolean, array };
    Kind kind = Kind::number;
    std::string str;
    double num = 0.0;
    bool flag = false;
    std::vector<DocValue> items; // for arrays

    static DocValue of(double x);
    static DocValue of(const std::string& s);
    static DocValue of(bool b);
    static DocValue list(const std::vector<double>& xs);
    static DocValue list(const std::vector<std::string>& ss);
};

struct DocSection {
    std::string name;     // full header text, e.g. "region" or "sweep.fault"
    bool is_array = false; // [[name]] vs [name]
    int line = 0;
    std::vector<std::pair<std::string, DocValue>> kv; // in file order
    std::map<std::string, int> kv_line;

    bool has(const std::string& key) const;
    const DocValue* find(const std::string& key) const;

    // Typed getters; `where` prefixes error messages (field path reporting).
    double get_number(const std::string& key, const std::string& where) const;
    double get_number_or(const std::string& key, double fallback) const;
    std::string get_string(const std::string& key, const std::string& where) const;
    std::vector<double> get_number_list(const std::string& key, const std::string& where) const;
    std::vector<std::string> get_string_list(const std::string& key, const std::string& where) const;

    void set(const std::string& key, DocValue v);
};

struct TextDoc {
    std::string origin; // file name for error messages
    std::vector<DocSection> sections; // in file order

    const DocSection* find_one(const std::string& name) const; // nullptr if absent; throws if repeated
    std::vector<const DocSection*> find_all(const std::string& name) const;
};

TextDoc parse_textdoc(std::string_view text, const std::string& origin);
TextDoc load_textdoc(const std::string& path);
std::string render_textdoc(const TextDoc& doc);
void save_textdoc(const TextDoc& doc, const std::string& path);

// Shortest round-trip decimal rendering of a double (exports must re-parse to
// the identical bit pattern).
std::string format_double(double x);

} // namespace gridfreq
