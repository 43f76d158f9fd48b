#include "gridfreq/textdoc.hpp"
#include "gridfreq/errors.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gridfreq {

DocValue DocValue::of(double x) {
    DocValue v;
    v.kind = Kind::number;
    v.num = x;
    return v;
}

DocValue DocValue::of(const std::string& s) {
    DocValue v;
    v.kind = Kind::string;
    v.str = s;
    return v;
}

DocValue DocValue::of(bool b) {
    DocValue v;
    v.kind = Kind::boolean;
    v.flag = b;
    return v;
}

DocValue DocValue::list(const std::vector<double>& xs) {
    DocValue v;
    v.kind = Kind::array;
    for (double x : xs) v.items.push_back(of(x));
    return v;
}

DocValue DocValue::list(const std::vector<std::string>& ss) {
    DocValue v;
    v.kind = Kind::array;
    for (const auto& s : ss) v.items.push_back(of(s));
    return v;
}

bool DocSection::has(const std::string& key) const { return find(key) != nullptr; }

const DocValue* DocSection::find(const std::string& key) const {
    for (const auto& [k, v] : kv)
        if (k == key) return &v;
    return nullptr;
}

double DocSection::get_number(const std::string& key, const std::string& where) const {
    const DocValue* v = find(key);
    if (!v) throw ConfigError(where + "." + key + ": missing required key");
    if (v->kind != DocValue::Kind::number)
        throw ConfigError(where + "." + key + ": expected a number");
    return v->num;
}

double DocSection::get_number_or(const std::string& key, double fallback) const {
    const DocValue* v = find(key);
    if (!v) return fallback;
    if (v->kind != DocValue::Kind::number)
        throw ConfigError(name + "." + key + ": expected a number");
    return v->num;
}

std::string DocSection::get_string(const std::string& key, const std::string& where) const {
    const DocValue* v = find(key);
    if (!v) throw ConfigError(where + "." + key + ": missing required key");
    if (v->kind != DocValue::Kind::string)
        throw ConfigError(where + "." + key + ": expected a quoted string");
    return v->str;
}

std::vector<double> DocSection::get_number_list(const std::string& key, const std::string& where) const {
    const DocValue* v = find(key);
    if (!v) throw ConfigError(where + "." + key + ": missing required key");
    if (v->kind != DocValue::Kind::array)
        throw ConfigError(where + "." + key + ": expected an array");
    std::vector<double> out;
    for (const auto& it : v->items) {
        if (it.kind != DocValue::Kind::number)
            throw ConfigError(where + "." + key + ": expected an array of numbers");
        out.push_back(it.num);
    }
    return out;
}

std::vector<std::string> DocSection::get_string_list(const std::string& key, const std::string& where) const {
    const DocValue* v = find(key);
    if (!v) throw ConfigError(where + "." + key + ": missing required key");
    if (v->kind != DocValue::Kind::array)
        throw ConfigError(where + "." + key + ": expected an array");
    std::vector<std::string> out;
    for (const auto& it : v->items) {
        if (it.kind != DocValue::Kind::string)
            throw ConfigError(where + "." + key + ": expected an array of strings");
        out.push_back(it.str);
    }
    return out;
}

void DocSection::set(const std::string& key, DocValue v) {
    for (auto& [k, old] : kv) {
        if (k == key) {
            old = std::move(v);
            return;
        }
    }
    kv.emplace_back(key, std::move(v));
}

const DocSection* TextDoc::find_one(const std::string& name) const {
    const DocSection* hit = nullptr;
    for (const auto& s : sections) {
        if (s.name != name) continue;
        if (hit) throw ConfigError(origin + ": section [" + name + "] given more than once");
        hit = &s;
    }
    return hit;
}

std::vector<const DocSection*> TextDoc::find_all(const std::string& name) const {
    std::vector<const DocSection*> out;
    for (const auto& s : sections)
        if (s.name == name) out.push_back(&s);
    return out;
}

namespace {

struct Cursor {
    std::string_view text;
    size_t pos = 0;
    int line = 1;
    std::string origin;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
    }
};

void skip_ws(Cursor& c, bool stop_at_newline) {
    while (c.pos < c.text.size()) {
        char ch = c.text[c.pos];
        if (ch == '#') { // comment runs to end of line
            while (c.pos < c.text.size() && c.text[c.pos] != '\n') ++c.pos;
            continue;
        }
        if (ch == '\n') {
            if (stop_at_newline) return;
            ++c.line;
            ++c.pos;
            continue;
        }
        if (ch == ' ' || ch == '\t' || ch == '\r') {
            ++c.pos;
            continue;
        }
        return;
    }
}

bool is_bare_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
}

std::string read_bare(Cursor& c) {
    size_t start = c.pos;
    while (c.pos < c.text.size() && is_bare_char(c.text[c.pos])) ++c.pos;
    if (c.pos == start) c.fail("expected a name");
    return std::string(c.text.substr(start, c.pos - start));
}

std::string read_quoted(Cursor& c) {
    ++c.pos; // opening quote
    std::string out;
    while (c.pos < c.text.size()) {
        char ch = c.text[c.pos];
        if (ch == '"') {
            ++c.pos;
            return out;
        }
        if (ch == '\\' && c.pos + 1 < c.text.size()) {
            char nxt = c.text[c.pos + 1];
            if (nxt == '"' || nxt == '\\') {
                out.push_back(nxt);
                c.pos += 2;
                continue;
            }
        }
        if (ch == '\n') c.fail("unterminated string");
        out.push_back(ch);
        ++c.pos;
    }
    c.fail("unterminated string");
}

DocValue read_value(Cursor& c); // fwd

DocValue read_array(Cursor& c) {
    ++c.pos; // '['
    DocValue v;
    v.kind = DocValue::Kind::array;
    for (;;) {
        skip_ws(c, false);
        if (c.pos >= c.text.size()) c.fail("unterminated array");
        if (c.text[c.pos] == ']') {
            ++c.pos;
            return v;
        }
        v.items.push_back(read_value(c));
        skip_ws(c, false);
        if (c.pos < c.text.size() && c.text[c.pos] == ',') {
            ++c.pos;
            continue;
        }
        if (c.pos < c.text.size() && c.text[c.pos] == ']') {
            ++c.pos;
            return v;
        }
        c.fail("expected ',' or ']' in array");
    }
}

DocValue read_value(Cursor& c) {
    if (c.pos >= c.text.size()) c.fail("expected a value");
    char ch = c.text[c.pos];
    if (ch == '"') return DocValue::of(read_quoted(c));
    if (ch == '[') return read_array(c);

    size_t start = c.pos;
    while (c.pos < c.text.size() && (is_bare_char(c.text[c.pos]) || c.text[c.pos] == '+')) ++c.pos;
    std::string token(c.text.substr(start, c.pos - start));
    if (token.empty() && start < c.text.size() && (c.text[start] == '-')) {
        // a bare '-' would have been consumed by is_bare_char; nothing to do
    }
    if (token == "true") return DocValue::of(true);
    if (token == "false") return DocValue::of(false);
    if (token.empty()) c.fail("expected a value");

    double x = 0.0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), x);
    if (ec != std::errc() || p != token.data() + token.size())
        c.fail("'" + token + "' is not a number (strings must be quoted)");
    return DocValue::of(x);
}

} // namespace

TextDoc parse_textdoc(std::string_view text, const std::string& origin) {
    TextDoc doc;
    doc.origin = origin;
    Cursor c{text, 0, 1, origin};
    DocSection* current = nullptr;

    for (;;) {
        skip_ws(c, false);
        if (c.pos >= c.text.size()) break;
        char ch = c.text[c.pos];

        if (ch == '[') {
            bool is_array = (c.pos + 1 < c.text.size() && c.text[c.pos + 1] == '[');
            c.pos += is_array ? 2 : 1;
            skip_ws(c, true);
            std::string name = read_bare(c);
            skip_ws(c, true);
            if (c.pos >= c.text.size() || c.text[c.pos] != ']') c.fail("expected ']' after section name");
            ++c.pos;
            if (is_array) {
                if (c.pos >= c.text.size() || c.text[c.pos] != ']') c.fail("expected ']]' after section name");
                ++c.pos;
            }
            DocSection s;
            s.name = name;
            s.is_array = is_array;
            s.line = c.line;
            doc.sections.push_back(std::move(s));
            current = &doc.sections.back();
            continue;
        }

        // key = value
        std::string key = read_bare(c);
        skip_ws(c, true);
        if (c.pos >= c.text.size() || c.text[c.pos] != '=') c.fail("expected '=' after key '" + key + "'");
        ++c.pos;
        skip_ws(c, true);
        int at_line = c.line;
        DocValue v = read_value(c);
        if (!current) {
            // allow a headerless preamble section named ""
            DocSection s;
            s.name = "";
            s.line = at_line;
            doc.sections.push_back(std::move(s));
            current = &doc.sections.back();
        }
        if (current->find(key))
            c.fail("duplicate key '" + key + "' in section [" + current->name + "]");
        current->kv.emplace_back(key, std::move(v));
        current->kv_line[key] = at_line;
    }
    return doc;
}

TextDoc load_textdoc(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_textdoc(buf.str(), path);
}

std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, p);
}

namespace {

void render_value(std::ostream& os, const DocValue& v) {
    switch (v.kind) {
    case DocValue::Kind::number:
        os << format_double(v.num);
        break;
    case DocValue::Kind::string: {
        os << '"';
        for (char ch : v.str) {
            if (ch == '"' || ch == '\\') os << '\\';
            os << ch;
        }
        os << '"';
        break;
    }
    case DocValue::Kind::boolean:
        os << (v.flag ? "true" : "false");
        break;
    case DocValue::Kind::array: {
        os << '[';
        for (size_t i = 0; i < v.items.size(); ++i) {
            if (i) os << ", ";
            render_value(os, v.items[i]);
        }
        os << ']';
        break;
    }
    }
}

} // namespace

std::string render_textdoc(const TextDoc& doc) {
    std::ostringstream os;
    bool first = true;
    for (const auto& s : doc.sections) {
        if (!first) os << "\n";
        first = false;
        if (!s.name.empty())
            os << (s.is_array ? "[[" : "[") << s.name << (s.is_array ? "]]" : "]") << "\n";
        for (const auto& [k, v] : s.kv) {
            os << k << " = ";
            render_value(os, v);
            os << "\n";
        }
    }
    return os.str();
}

void save_textdoc(const TextDoc& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    out << render_textdoc(doc);
}

} // namespace gridfreq
