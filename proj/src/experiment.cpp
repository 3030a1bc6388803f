#include "symdyn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "symdyn/errors.hpp"
#include "symdyn/estimators.hpp"
#include "symdyn/recurrence.hpp"
#include "symdyn/serialize.hpp"

namespace symdyn::exp {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Source positions for diagnostics

std::size_t skip_ws(const std::string& t, std::size_t i) {
    while (i < t.size() && (t[i] == ' ' || t[i] == '\n' || t[i] == '\r' || t[i] == '\t')) ++i;
    return i;
}

std::size_t skip_string(const std::string& t, std::size_t i) {
    // t[i] == '"'
    for (++i; i < t.size(); ++i) {
        if (t[i] == '\\') {
            ++i;
        } else if (t[i] == '"') {
            return i + 1;
        }
    }
    return t.size();
}

// Offset of the value of `key` in the object opening at `begin`, or npos.
std::size_t value_offset(const std::string& t, std::size_t begin, const std::string& key) {
    if (begin >= t.size() || t[begin] != '{') return std::string::npos;
    int depth = 0;
    for (std::size_t i = begin; i < t.size();) {
        const char c = t[i];
        if (c == '"') {
            const std::size_t end = skip_string(t, i);
            if (depth == 1) {
                const std::size_t colon = skip_ws(t, end);
                if (colon < t.size() && t[colon] == ':') {
                    if (t.compare(i + 1, end - i - 2, key) == 0) return skip_ws(t, colon + 1);
                }
            }
            i = end;
            continue;
        }
        if (c == '{' || c == '[') ++depth;
        if (c == '}' || c == ']') {
            if (--depth == 0) break;
        }
        ++i;
    }
    return std::string::npos;
}

// Offset of element `index` of the array opening at `begin`, or npos.
std::size_t element_offset(const std::string& t, std::size_t begin, std::size_t index) {
    if (begin >= t.size() || t[begin] != '[') return std::string::npos;
    std::size_t seen = 0;
    int depth = 0;
    std::size_t i = skip_ws(t, begin + 1);
    if (index == 0) return i;
    for (; i < t.size();) {
        const char c = t[i];
        if (c == '"') {
            i = skip_string(t, i);
            continue;
        }
        if (c == '{' || c == '[') ++depth;
        if (c == '}' || c == ']') {
            if (depth == 0) break;
            --depth;
        }
        if (c == ',' && depth == 0 && ++seen == index) return skip_ws(t, i + 1);
        ++i;
    }
    return std::string::npos;
}

std::size_t line_at(const std::string& t, std::size_t offset) {
    if (offset == std::string::npos) return 0;
    return 1 + static_cast<std::size_t>(std::count(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// ---------------------------------------------------------------------------
// Validating reader that records every value it hands out, defaults included.

class Fields {
public:
    Fields(const json& obj, std::string path, const std::string& text, std::size_t offset)
        : obj_(obj), path_(std::move(path)), text_(text), offset_(offset) {
        if (!obj_.is_object()) throw ConfigError(where(""), "expected an object");
    }

    std::string where(const std::string& key) const {
        const std::string field = key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
        std::size_t off = key.empty() ? offset_ : value_offset(text_, offset_, key);
        if (off == std::string::npos) off = offset_;
        const auto line = line_at(text_, off);
        std::string w = line ? "line " + std::to_string(line) : std::string();
        if (!field.empty()) w += (w.empty() ? "" : ", ") + std::string("field ") + field;
        return w;
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        T v = obj_.contains(key) ? convert<T>(key) : std::move(fallback);
        out_[key] = v;
        return v;
    }

    template <class T>
    T require(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key)) throw ConfigError(where(""), "missing required field '" + key + "'");
        T v = convert<T>(key);
        out_[key] = v;
        return v;
    }

    // Raw access without materialization.
    const json* raw(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key) ? &obj_.at(key) : nullptr;
    }

    Fields child(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        const json& v = obj_.contains(key) ? obj_.at(key) : empty;
        std::size_t off = value_offset(text_, offset_, key);
        return Fields(v, path_.empty() ? key : path_ + "." + key, text_, off == std::string::npos ? offset_ : off);
    }

    std::size_t offset_of(const std::string& key) const {
        const auto off = value_offset(text_, offset_, key);
        return off == std::string::npos ? offset_ : off;
    }

    void set(const std::string& key, json v) { out_[key] = std::move(v); }

    void finish() const {
        for (const auto& [k, v] : obj_.items()) {
            if (!seen_.count(k)) throw ConfigError(where(k), "unknown field '" + k + "'");
        }
    }

    const json& out() const { return out_; }
    const std::string& path() const { return path_; }
    const std::string& text() const { return text_; }

private:
    template <class T>
    T convert(const std::string& key) const {
        const json& v = obj_.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(where(key), "expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(where(key), "expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError(where(key), "expected a number");
            return v.get<double>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_unsigned()) throw ConfigError(where(key), "expected a non-negative integer");
            return v.get<T>();
        } else {
            // std::vector of unsigned integers or strings
            using E = typename T::value_type;
            if (!v.is_array()) throw ConfigError(where(key), "expected an array");
            T outv;
            for (const auto& e : v) {
                if constexpr (std::is_same_v<E, std::string>) {
                    if (!e.is_string()) throw ConfigError(where(key), "expected an array of strings");
                } else {
                    if (!e.is_number_unsigned()) {
                        throw ConfigError(where(key), "expected an array of non-negative integers");
                    }
                }
                outv.push_back(e.get<E>());
            }
            return outv;
        }
    }

    const json& obj_;
    std::string path_;
    const std::string& text_;
    std::size_t offset_;
    std::set<std::string> seen_;
    json out_ = json::object();
};

// ---------------------------------------------------------------------------
// Systems

const std::vector<std::string> kGenerators = {"periodic",   "sturmian",       "toeplitz",
                                              "full_shift", "champernowne23", "paper_example"};

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

std::vector<Symbol> to_symbols(const std::vector<std::uint64_t>& v) {
    std::vector<Symbol> out;
    for (auto s : v) out.push_back(static_cast<Symbol>(s));
    return out;
}

gen::PaperExampleParams paper_params(const json& p) {
    gen::PaperExampleParams out;
    out.i_max = p.at("i_max").get<std::size_t>();
    if (p.at("y").is_array()) out.y = to_symbols(p.at("y").get<std::vector<std::uint64_t>>());
    if (p.at("k_rule").is_array()) {
        out.k_rule = gen::KRule::explicit_list;
        out.k_list = p.at("k_rule").get<std::vector<std::uint64_t>>();
    }
    return out;
}

// Validates generator params and returns the materialized object.
json parse_generator_params(const std::string& generator, Fields f) {
    if (generator == "periodic") {
        const auto word = f.require<std::string>("word");
        unsigned top = 0;
        for (char c : word) {
            if (c < '0' || c > '9') throw ConfigError(f.where("word"), "period word must be decimal digits");
            top = std::max(top, static_cast<unsigned>(c - '0'));
        }
        if (word.empty()) throw ConfigError(f.where("word"), "empty period word");
        const auto k = f.get<unsigned>("alphabet_size", std::max(2u, top + 1));
        if (k <= top || k > 10) throw ConfigError(f.where("alphabet_size"), "alphabet size must cover the word");
    } else if (generator == "sturmian") {
        f.get<std::string>("alpha", "golden");
        f.get<std::string>("theta", "0");
    } else if (generator == "toeplitz") {
        f.get<std::vector<std::uint64_t>>("periods", {2, 4});
        const auto k = f.get<unsigned>("alphabet_size", 2);
        for (auto s : f.get<std::vector<std::uint64_t>>("symbols", {0, 1})) {
            if (s >= k) throw ConfigError(f.where("symbols"), "fill symbol outside the alphabet");
        }
        f.get<std::size_t>("levels", 0);
    } else if (generator == "full_shift") {
        const auto k = f.get<unsigned>("k", 2);
        if (k < 2 || k > 256) throw ConfigError(f.where("k"), "k must be in [2, 256]");
        const auto mode = f.get<std::string>("mode", "champernowne");
        if (mode != "champernowne" && mode != "random") {
            throw ConfigError(f.where("mode"), "mode must be \"champernowne\" or \"random\"");
        }
        f.get<std::uint64_t>("seed", 1);
    } else if (generator == "champernowne23") {
        // no parameters
    } else if (generator == "paper_example") {
        const auto i_max = f.get<std::size_t>("i_max", 6);
        if (i_max < 1) throw ConfigError(f.where("i_max"), "i_max must be >= 1");
        if (const json* y = f.raw("y"); y && y->is_array()) {
            f.set("y", f.get<std::vector<std::uint64_t>>("y", {}));
        } else {
            if (y && !(y->is_string() && *y == "champernowne23")) {
                throw ConfigError(f.where("y"), "y must be \"champernowne23\" or an array of 2/3 symbols");
            }
            f.set("y", "champernowne23");
        }
        if (const json* k = f.raw("k_rule"); k && k->is_array()) {
            f.set("k_rule", f.get<std::vector<std::uint64_t>>("k_rule", {}));
        } else {
            if (k && !(k->is_string() && *k == "auto")) {
                throw ConfigError(f.where("k_rule"), "k_rule must be \"auto\" or an array of block lengths");
            }
            f.set("k_rule", "auto");
        }
    }
    f.finish();
    return f.out();
}

SymbolicSequence generate(const std::string& generator, const json& p, std::size_t length,
                          std::optional<gen::PaperExampleMeta>* meta) {
    if (generator == "periodic") {
        return gen::periodic(FiniteWord::parse(p.at("word").get<std::string>(), p.at("alphabet_size").get<unsigned>()),
                             length);
    }
    if (generator == "sturmian") {
        return gen::sturmian({p.at("alpha").get<std::string>(), p.at("theta").get<std::string>()}, length);
    }
    if (generator == "toeplitz") {
        gen::ToeplitzParams tp;
        tp.periods = p.at("periods").get<std::vector<std::uint64_t>>();
        tp.symbols = to_symbols(p.at("symbols").get<std::vector<std::uint64_t>>());
        tp.alphabet_size = p.at("alphabet_size").get<unsigned>();
        tp.levels = p.at("levels").get<std::size_t>();
        return gen::toeplitz_regular(tp, length);
    }
    if (generator == "full_shift") {
        gen::FullShiftParams fp;
        fp.k = p.at("k").get<unsigned>();
        fp.champernowne = p.at("mode") == "champernowne";
        fp.seed = p.at("seed").get<std::uint64_t>();
        return gen::full_shift_point(fp, length);
    }
    if (generator == "champernowne23") return gen::champernowne23(length);
    if (generator == "paper_example") {
        auto [x, m] = gen::build_paper_example(paper_params(p));
        *meta = std::move(m);
        return std::move(x);
    }
    throw ArgumentError("unknown generator " + generator);
}

// ---------------------------------------------------------------------------
// Tests

const std::vector<std::string> kDiamTests = {"diam_mean_avg", "diam_mean_density", "banach_diam_mean",
                                             "stable_in_mean", "frequent_stability"};
const std::vector<std::string> kTests = {"diam_mean_avg",      "diam_mean_density",     "banach_diam_mean",
                                         "stable_in_mean",     "frequent_stability",    "diam_mean_sensitivity",
                                         "mean_eq",            "a_n",                   "entropy",
                                         "recurrence",         "hierarchy"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void check_unit(Fields& f, const std::string& key, double v) {
    if (!(v > 0.0) || v > 1.0) throw ConfigError(f.where(key), key + " must be in (0, 1]");
}

void parse_ball(Fields& f) {
    const json* w = f.raw("word");
    if (w && !w->is_null()) {
        if (!w->is_string() || w->get<std::string>().empty()) {
            throw ConfigError(f.where("word"), "word must be a non-empty digit string");
        }
        f.set("word", *w);
        f.set("depth", w->get<std::string>().size());
        f.raw("depth");
    } else {
        f.set("word", nullptr);
        if (f.get<std::size_t>("depth", 2) < 1) throw ConfigError(f.where("depth"), "depth must be >= 1");
    }
}

json parse_test(Fields f, std::size_t horizon, std::size_t depth_cap, const std::string& test) {
    const auto n = f.get<std::size_t>("N", horizon);
    const auto k = f.get<std::size_t>("K", depth_cap);
    if (n < 1) throw ConfigError(f.where("N"), "N must be >= 1");
    if (k < 1 || k > 65535) throw ConfigError(f.where("K"), "K must be in [1, 65535]");

    if (contains(kDiamTests, test)) {
        parse_ball(f);
        f.get<std::size_t>("occ_limit", est::kDefaultOccLimit);
        if (test == "diam_mean_density") {
            check_unit(f, "eta", f.get<double>("eta", 0.1));
        } else {
            check_unit(f, "epsilon", f.get<double>("epsilon", 0.1));
        }
        if (test == "frequent_stability") check_unit(f, "gamma", f.get<double>("gamma", est::kDefaultGamma));
        if (test == "banach_diam_mean") {
            f.get<std::vector<std::size_t>>("windows", density::default_banach_windows(n));
        } else if (test != "stable_in_mean") {
            f.get<std::vector<std::size_t>>("schedule", density::default_upper_schedule(n));
        }
    } else if (test == "diam_mean_sensitivity") {
        check_unit(f, "epsilon", f.get<double>("epsilon", 0.1));
        if (f.get<std::size_t>("depth", 2) < 1) throw ConfigError(f.where("depth"), "depth must be >= 1");
        f.get<std::vector<std::string>>("words", {});
        f.get<std::size_t>("occ_limit", est::kDefaultOccLimit);
    } else if (test == "mean_eq") {
        check_unit(f, "epsilon", f.get<double>("epsilon", 0.1));
        if (f.get<std::vector<std::size_t>>("depths", {2, 4, 8, 16}).empty()) {
            throw ConfigError(f.where("depths"), "depths must be non-empty");
        }
        f.get<std::size_t>("pair_budget", 16);
    } else if (test == "a_n") {
        f.get<std::size_t>("i_first", 1);
        f.get<std::size_t>("i_last", 0);  // 0: i_max - 1
    } else if (test == "entropy") {
        const auto lo = f.get<std::size_t>("n_min", 1);
        const auto hi = f.get<std::size_t>("n_max", 12);
        if (lo < 1 || lo > hi) throw ConfigError(f.where("n_max"), "need 1 <= n_min <= n_max");
        f.get<std::size_t>("limit", 0);  // 0: whole prefix
    } else if (test == "recurrence") {
        if (f.get<std::size_t>("d", 2) < 1) throw ConfigError(f.where("d"), "d must be >= 1");
        const auto m = f.get<std::size_t>("m", 8);
        if (m < 1 || m >= k) throw ConfigError(f.where("m"), "need 1 <= m < K");
    } else if (test == "hierarchy") {
        parse_ball(f);
        const auto eps = f.get<double>("epsilon", 0.1);
        check_unit(f, "epsilon", eps);
        check_unit(f, "eta", f.get<double>("eta", eps));
        check_unit(f, "gamma", f.get<double>("gamma", est::kDefaultGamma));
        f.get<std::size_t>("sensitivity_depth", 0);
        if (f.get<std::vector<std::size_t>>("mean_eq_depths", {2, 4, 8, 16}).empty()) {
            throw ConfigError(f.where("mean_eq_depths"), "mean_eq_depths must be non-empty");
        }
        f.get<std::size_t>("pair_budget", 16);
        f.get<std::size_t>("occ_limit", est::kDefaultOccLimit);
    }
    f.finish();
    return f.out();
}

// Symbols a test needs from a system prefix.
std::size_t required_length(const json& t) {
    const std::string test = t.at("test");
    const auto n = t.at("N").get<std::size_t>();
    const auto k = t.at("K").get<std::size_t>();
    if (test == "recurrence") return t.at("d").get<std::size_t>() * n + k;
    if (test == "entropy") return std::max(t.at("limit").get<std::size_t>(), t.at("n_max").get<std::size_t>());
    if (test == "a_n") return 0;
    return 4 * n + 2 * k;
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& text, const Overrides& overrides) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("line " + std::to_string(line_at(text, std::min(e.byte, text.size()))), e.what());
    }
    if (overrides.horizon) root["horizon"] = *overrides.horizon;
    if (overrides.depth_cap) root["depth_cap"] = *overrides.depth_cap;
    if (overrides.output_dir) root["output_dir"] = overrides.output_dir->string();

    const std::size_t root_off = skip_ws(text, 0);
    Fields top(root, "", text, root_off);
    ExperimentConfig cfg;
    cfg.schema_version = top.require<int>("schema_version");
    if (cfg.schema_version != kSchemaVersion) {
        throw ConfigError(top.where("schema_version"), "unsupported schema version " +
                                                           std::to_string(cfg.schema_version) + " (expected " +
                                                           std::to_string(kSchemaVersion) + ")");
    }
    cfg.horizon = top.get<std::size_t>("horizon", cfg.horizon);
    cfg.depth_cap = top.get<std::size_t>("depth_cap", cfg.depth_cap);
    if (cfg.horizon < 1) throw ConfigError(top.where("horizon"), "horizon must be >= 1");
    if (cfg.depth_cap < 1 || cfg.depth_cap > 65535) {
        throw ConfigError(top.where("depth_cap"), "depth_cap must be in [1, 65535]");
    }
    cfg.output_dir = top.get<std::string>("output_dir", cfg.output_dir);
    if (const json* c = top.raw("cache_dir")) {
        if (!c->is_string()) throw ConfigError(top.where("cache_dir"), "expected a string");
        cfg.cache_dir = fs::path(c->get<std::string>());
    }
    if (const json* th = top.raw("threads")) {
        if (!th->is_number_unsigned()) throw ConfigError(top.where("threads"), "expected a non-negative integer");
        cfg.threads = th->get<std::size_t>();
    }

    const json* systems = top.raw("systems");
    if (!systems || !systems->is_array() || systems->empty()) {
        throw ConfigError(top.where(systems ? "systems" : ""), "systems must be a non-empty array");
    }
    const std::size_t sys_off = top.offset_of("systems");
    std::set<std::string> names;
    for (std::size_t i = 0; i < systems->size(); ++i) {
        const auto off = element_offset(text, sys_off, i);
        Fields f((*systems)[i], "systems[" + std::to_string(i) + "]", text,
                 off == std::string::npos ? sys_off : off);
        SystemSpec s;
        s.name = f.require<std::string>("name");
        if (!valid_name(s.name)) throw ConfigError(f.where("name"), "name must match [A-Za-z0-9_-]+");
        if (!names.insert(s.name).second) throw ConfigError(f.where("name"), "duplicate system name " + s.name);
        s.generator = f.require<std::string>("generator");
        if (!contains(kGenerators, s.generator)) {
            throw ConfigError(f.where("generator"), "unknown generator '" + s.generator + "'");
        }
        s.params = parse_generator_params(s.generator, f.child("params"));
        s.length = f.get<std::size_t>("length", 0);
        f.finish();
        cfg.systems.push_back(std::move(s));
    }

    const json* tests = top.raw("tests");
    if (!tests || !tests->is_array() || tests->empty()) {
        throw ConfigError(top.where(tests ? "tests" : ""), "tests must be a non-empty array");
    }
    const std::size_t test_off = top.offset_of("tests");
    std::set<std::pair<std::string, std::string>> labels;
    for (std::size_t i = 0; i < tests->size(); ++i) {
        const auto off = element_offset(text, test_off, i);
        Fields f((*tests)[i], "tests[" + std::to_string(i) + "]", text, off == std::string::npos ? test_off : off);
        TestSpec t;
        t.test = f.require<std::string>("test");
        if (!contains(kTests, t.test)) throw ConfigError(f.where("test"), "unknown test '" + t.test + "'");
        const auto label = f.get<std::string>("label", t.test);
        if (!valid_name(label)) throw ConfigError(f.where("label"), "label must match [A-Za-z0-9_-]+");
        t.systems = f.get<std::vector<std::string>>("systems", {});
        for (const auto& s : t.systems) {
            if (!names.count(s)) throw ConfigError(f.where("systems"), "unknown system '" + s + "'");
        }
        for (const auto& s : cfg.systems) {
            if (!t.systems.empty() && !contains(t.systems, s.name)) continue;
            if (!labels.insert({s.name, label}).second) {
                throw ConfigError(f.where("label"), "duplicate (system, test) pair (" + s.name + ", " + label + ")");
            }
            if (t.test == "a_n" && s.generator != "paper_example") {
                throw ConfigError(f.where("test"), "a_n applies to paper_example systems only (system " + s.name +
                                                       ")");
            }
        }
        // Remaining fields are test-specific; re-read through a fresh reader.
        json rest = (*tests)[i];
        rest.erase("test");
        rest.erase("label");
        rest.erase("systems");
        Fields tf(rest, f.path(), text, off == std::string::npos ? test_off : off);
        json params = parse_test(std::move(tf), cfg.horizon, cfg.depth_cap, t.test);
        params["test"] = t.test;
        params["label"] = label;
        params["systems"] = t.systems;
        t.params = std::move(params);
        cfg.tests.push_back(std::move(t));
    }
    top.finish();

    // Lengths: derived for the zero-block example, otherwise large enough for every test.
    for (std::size_t i = 0; i < cfg.systems.size(); ++i) {
        auto& s = cfg.systems[i];
        const std::string where = "systems[" + std::to_string(i) + "].length";
        if (s.generator == "paper_example") {
            gen::PaperExampleMeta meta;
            try {
                meta = gen::paper_example_schedule(paper_params(s.params));
            } catch (const ArgumentError& e) {
                throw ConfigError(where, e.what());
            }
            const auto derived = static_cast<std::size_t>(meta.p.back());
            if (s.length != 0 && s.length != derived) {
                throw ConfigError(where, "paper_example length is fixed at p_{i_max+1} = " + std::to_string(derived));
            }
            s.length = derived;
            continue;
        }
        std::size_t need = 1024;
        for (const auto& t : cfg.tests) {
            if (!t.systems.empty() && !contains(t.systems, s.name)) continue;
            need = std::max(need, required_length(t.params));
        }
        if (s.length == 0) s.length = need;
    }

    if (overrides.threads) cfg.threads = *overrides.threads;
    if (const char* env = std::getenv(kCacheEnvVar); env && *env) cfg.cache_dir = fs::path(env);
    if (overrides.cache_dir) cfg.cache_dir = overrides.cache_dir;
    if (cfg.threads == 0) cfg.threads = std::max(1u, std::thread::hardware_concurrency());
    return cfg;
}

ExperimentConfig load_config(const fs::path& path, const Overrides& overrides) {
    std::string text;
    try {
        text = io::read_text(path);
    } catch (const std::exception& e) {
        throw ConfigError("", e.what());
    }
    return parse_config(text, overrides);
}

json materialize(const ExperimentConfig& config) {
    json j;
    j["schema_version"] = config.schema_version;
    j["horizon"] = config.horizon;
    j["depth_cap"] = config.depth_cap;
    j["output_dir"] = config.output_dir;
    json systems = json::array();
    for (const auto& s : config.systems) {
        systems.push_back({{"name", s.name}, {"generator", s.generator}, {"params", s.params}, {"length", s.length}});
    }
    j["systems"] = systems;
    json tests = json::array();
    for (const auto& t : config.tests) tests.push_back(t.params);
    j["tests"] = tests;
    return j;
}

// ---------------------------------------------------------------------------
// Building with cache

namespace {

std::string cache_key(const SystemSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
    };
    mix(spec.generator);
    mix("\n");
    mix(spec.params.dump());
    mix("\n");
    mix(std::to_string(spec.length));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

BuiltSystem build_system(const SystemSpec& spec, const std::optional<fs::path>& cache_dir) {
    std::optional<fs::path> file;
    if (cache_dir) {
        file = *cache_dir / (spec.generator + "-" + cache_key(spec) + ".sym");
        if (fs::exists(*file) && fs::exists(io::sidecar_path(*file))) {
            std::optional<SymbolicSequence> x;
            try {
                x = io::read_sequence(*file);
            } catch (const std::exception&) {
                // Unreadable entry: fall through and regenerate.
            }
            if (x && x->generator_id() == spec.generator && x->length() == spec.length) {
                std::optional<gen::PaperExampleMeta> meta;
                if (spec.generator == "paper_example") meta = gen::paper_example_schedule(paper_params(spec.params));
                return BuiltSystem{spec, std::move(*x), std::move(meta), true};
            }
        }
    }
    std::optional<gen::PaperExampleMeta> meta;
    auto x = generate(spec.generator, spec.params, spec.length, &meta);
    if (file) io::write_sequence(*file, x);
    return BuiltSystem{spec, std::move(x), std::move(meta), false};
}

// ---------------------------------------------------------------------------
// Running

namespace {

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& fn) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::min(std::max<std::size_t>(threads, 1), count);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

struct JobOutput {
    std::vector<ReportRow> rows;
    std::vector<std::pair<std::string, std::string>> files;  // relative path, contents
    std::optional<json> hierarchy;
};

FiniteWord resolve_word(const json& t, const SymbolicSequence& x) {
    if (t.at("word").is_string()) {
        const auto text = t.at("word").get<std::string>();
        if (x.alphabet_size() > 10) throw ArgumentError("word notation needs alphabet size <= 10");
        return FiniteWord::parse(text, x.alphabet_size());
    }
    return cylinder_ball_identity(x, t.at("depth").get<std::size_t>()).word;
}

ReportRow verdict_row(const std::string& system, const std::string& test, const json& params,
                      const est::StabilityVerdict& v) {
    ReportRow r;
    r.system = system;
    r.test = test;
    r.params = params;
    r.statistic = v.statistic;
    r.bias = v.bias;
    r.verdict = est::to_string(v.verdict);
    return r;
}

json strip_meta(json t) {
    t.erase("systems");
    return t;
}

JobOutput run_job(const BuiltSystem& sys, const json& t) {
    const auto& x = sys.sequence;
    const std::string test = t.at("test");
    const std::string label = t.at("label");
    const std::string name = sys.spec.name;
    const std::string stem = name + "__" + label;
    const std::string verdict_file = "verdicts/" + stem + ".json";
    const std::string series_file = "series/" + stem + ".csv";
    const auto n = t.at("N").get<std::size_t>();
    const auto k = t.at("K").get<std::size_t>();
    const json params = strip_meta(t);
    JobOutput out;

    if (contains(kDiamTests, test)) {
        const auto w = resolve_word(t, x);
        const auto series = est::diam_series(x, w, n, k, t.at("occ_limit").get<std::size_t>());
        est::StabilityVerdict v;
        if (test == "diam_mean_avg") {
            v = est::diam_mean_avg_test(series, t.at("epsilon"), t.at("schedule").get<std::vector<std::size_t>>());
        } else if (test == "diam_mean_density") {
            v = est::diam_mean_density_test(series, t.at("eta"), t.at("schedule").get<std::vector<std::size_t>>());
        } else if (test == "banach_diam_mean") {
            v = est::banach_diam_mean_test(series, t.at("epsilon"), t.at("windows").get<std::vector<std::size_t>>());
        } else if (test == "stable_in_mean") {
            v = est::stable_in_mean_test(series, t.at("epsilon"));
        } else {
            v = est::frequent_stability_test(series, t.at("epsilon"), t.at("gamma"),
                                             t.at("schedule").get<std::vector<std::size_t>>());
        }
        v.evidence_ref = series_file;
        out.rows.push_back(verdict_row(name, label, params, v));
        out.files.emplace_back(verdict_file, est::to_json(v).dump(2) + "\n");
        out.files.emplace_back(series_file, io::diam_series_csv(series));
    } else if (test == "diam_mean_sensitivity") {
        est::SensitivityOptions opt;
        opt.depth = t.at("depth");
        opt.occ_limit = t.at("occ_limit");
        for (const auto& s : t.at("words")) opt.words.push_back(FiniteWord::parse(s.get<std::string>(), x.alphabet_size()));
        auto v = est::diam_mean_sensitivity_test(x, n, k, t.at("epsilon"), opt);
        out.rows.push_back(verdict_row(name, label, params, v));
        out.files.emplace_back(verdict_file, est::to_json(v).dump(2) + "\n");
    } else if (test == "mean_eq") {
        const auto depths = t.at("depths").get<std::vector<std::size_t>>();
        const auto curve = est::mean_eq_modulus(x, depths, t.at("pair_budget"), n, k);
        auto v = est::mean_eq_test(curve, t.at("epsilon"));
        v.evidence_ref = series_file;
        std::string csv = "m,statistic,pairs\n";
        for (const auto& p : curve.points) {
            csv += std::to_string(p.depth) + "," + io::format_double(p.statistic) + "," + std::to_string(p.pairs) + "\n";
        }
        out.rows.push_back(verdict_row(name, label, params, v));
        out.files.emplace_back(verdict_file, est::to_json(v).dump(2) + "\n");
        out.files.emplace_back(series_file, csv);
    } else if (test == "a_n") {
        const auto& meta = *sys.meta;
        const auto i_first = t.at("i_first").get<std::size_t>();
        auto i_last = t.at("i_last").get<std::size_t>();
        if (i_last == 0) i_last = meta.k.size() - 1;
        const auto st = est::a_n_statistic(x, meta, i_first, i_last);
        json j;
        j["test"] = "a_n";
        j["params"] = params;
        j["occurrences"] = st.occurrence_count;
        j["levels"] = st.levels;
        j["horizons"] = st.horizons;
        j["a"] = st.a;
        j["ratios"] = st.ratios;
        j["bounds"] = st.bounds;
        std::string csv = "i,N,a_N,ratio,bound\n";
        for (std::size_t q = 0; q < st.levels.size(); ++q) {
            const bool holds = st.ratios[q] <= st.bounds[q];
            ReportRow r;
            r.system = name;
            r.test = label + "[i=" + std::to_string(st.levels[q]) + "]";
            r.params = params;
            r.params["i"] = st.levels[q];
            r.params["N"] = st.horizons[q];
            r.params["a_N"] = st.a[q];
            r.statistic = st.ratios[q];
            r.bias = 0.0;
            r.verdict = holds ? "within-bound" : "exceeds-bound";
            r.a_ratio = st.ratios[q];
            out.rows.push_back(r);
            csv += std::to_string(st.levels[q]) + "," + std::to_string(st.horizons[q]) + "," + std::to_string(st.a[q]) +
                   "," + io::format_double(st.ratios[q]) + "," + io::format_double(st.bounds[q]) + "\n";
        }
        out.files.emplace_back(verdict_file, j.dump(2) + "\n");
        out.files.emplace_back(series_file, csv);
    } else if (test == "entropy") {
        const auto limit = t.at("limit").get<std::size_t>();
        const auto curve = est::entropy_complexity(x, t.at("n_min"), t.at("n_max"),
                                                   limit ? std::optional<std::size_t>(limit) : std::nullopt);
        json j;
        j["test"] = "entropy";
        j["params"] = params;
        j["limit"] = curve.limit;
        j["lengths"] = curve.lengths;
        j["counts"] = curve.counts;
        j["values"] = curve.values;
        j["non_increasing"] = curve.non_increasing;
        std::string csv = "n,count,value\n";
        for (std::size_t q = 0; q < curve.lengths.size(); ++q) {
            csv += std::to_string(curve.lengths[q]) + "," + std::to_string(curve.counts[q]) + "," +
                   io::format_double(curve.values[q]) + "\n";
        }
        ReportRow r;
        r.system = name;
        r.test = label;
        r.params = params;
        r.statistic = curve.values.back();
        r.verdict = curve.non_increasing ? "estimate-non-increasing" : "estimate";
        out.rows.push_back(r);
        out.files.emplace_back(verdict_file, j.dump(2) + "\n");
        out.files.emplace_back(series_file, csv);
    } else if (test == "recurrence") {
        const auto res = rec::multi_recurrence_search(x, t.at("d"), t.at("m"), n, k);
        ReportRow r;
        r.system = name;
        r.test = label;
        r.params = params;
        if (res.n) r.statistic = static_cast<double>(*res.n);
        r.verdict = res.n ? "found" : "not-found";
        out.rows.push_back(r);
        out.files.emplace_back(verdict_file, rec::to_json(res).dump(2) + "\n");
    } else if (test == "hierarchy") {
        est::ClassifyParams cp;
        if (t.at("word").is_string()) cp.word = resolve_word(t, x);
        cp.depth = t.at("depth");
        cp.horizon = n;
        cp.depth_cap = k;
        cp.epsilon = t.at("epsilon");
        cp.eta = t.at("eta");
        cp.gamma = t.at("gamma");
        cp.sensitivity_depth = t.at("sensitivity_depth");
        cp.mean_eq_depths = t.at("mean_eq_depths").get<std::vector<std::size_t>>();
        cp.pair_budget = t.at("pair_budget");
        cp.occ_limit = t.at("occ_limit");
        auto report = est::classify_hierarchy(x, name, cp);
        for (auto& v : report.verdicts) v.evidence_ref = series_file;
        for (const auto& v : report.verdicts) out.rows.push_back(verdict_row(name, label + "/" + v.test, params, v));
        out.rows.push_back(verdict_row(name, label + "/" + report.sensitivity.test, params, report.sensitivity));
        for (const auto& rung : report.ladder) {
            ReportRow r;
            r.system = name;
            r.test = label + "/rung:" + rung.name;
            r.params = params;
            r.verdict = est::to_string(rung.verdict);
            out.rows.push_back(r);
        }
        ReportRow lvl;
        lvl.system = name;
        lvl.test = label + "/level";
        lvl.params = params;
        lvl.verdict = report.level;
        out.rows.push_back(lvl);

        auto j = est::to_json(report);
        j["params"] = params;
        out.files.emplace_back(verdict_file, j.dump(2) + "\n");
        out.files.emplace_back(series_file, io::diam_series_csv(report.series));
        json summary;
        summary["system"] = name;
        summary["label"] = label;
        summary["word"] = report.word.to_string();
        summary["level"] = report.level;
        for (const auto& rung : report.ladder) summary["rungs"][rung.name] = est::to_string(rung.verdict);
        summary["sensitivity"] = est::to_string(report.sensitivity.verdict);
        summary["dichotomy_consistent"] = report.dichotomy_consistent;
        out.hierarchy = summary;
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::string opt_number(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string report_csv(const std::vector<ReportRow>& rows) {
    std::string out = "system,test,params,statistic,bias,verdict,a_ratio\n";
    for (const auto& r : rows) {
        out += csv_field(r.system) + "," + csv_field(r.test) + "," + csv_field(r.params.dump()) + "," +
               opt_number(r.statistic) + "," + opt_number(r.bias) + "," + csv_field(r.verdict) + "," +
               opt_number(r.a_ratio) + "\n";
    }
    return out;
}

RunSummary run_experiment(const ExperimentConfig& config) {
    std::vector<std::optional<BuiltSystem>> built(config.systems.size());
    parallel_for(config.systems.size(), config.threads,
                 [&](std::size_t i) { built[i] = build_system(config.systems[i], config.cache_dir); });

    struct Job {
        std::size_t system;
        std::size_t test;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < config.systems.size(); ++s) {
        for (std::size_t t = 0; t < config.tests.size(); ++t) {
            const auto& filter = config.tests[t].systems;
            if (filter.empty() || contains(filter, config.systems[s].name)) jobs.push_back({s, t});
        }
    }

    std::vector<JobOutput> outputs(jobs.size());
    parallel_for(jobs.size(), config.threads, [&](std::size_t j) {
        const auto start = std::chrono::steady_clock::now();
        outputs[j] = run_job(*built[jobs[j].system], config.tests[jobs[j].test].params);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (auto& r : outputs[j].rows) r.wall_seconds = secs;
    });

    RunSummary summary;
    summary.output_dir = config.output_dir;
    const fs::path root(config.output_dir);
    fs::create_directories(root / "verdicts");
    fs::create_directories(root / "series");
    std::string timing = "system,test,wall_seconds\n";
    for (auto& o : outputs) {
        for (auto& r : o.rows) {
            timing += csv_field(r.system) + "," + csv_field(r.test) + "," + io::format_double(r.wall_seconds) + "\n";
            summary.rows.push_back(std::move(r));
        }
        for (const auto& [rel, content] : o.files) io::write_text(root / rel, content);
        if (o.hierarchy) summary.hierarchy.push_back(*o.hierarchy);
    }
    io::write_text(root / "report.csv", "# generated " + utc_timestamp() + "\n" + report_csv(summary.rows));
    io::write_text(root / "timing.csv", timing);
    io::write_text(root / "config.json", materialize(config).dump(2) + "\n");
    if (!summary.hierarchy.empty()) {
        std::string csv = "system,label,word,level,diam_mean_eq,mean_eq_frequent,mean_eq,sensitivity,"
                          "dichotomy_consistent\n";
        for (const auto& h : summary.hierarchy) {
            const auto& rg = h.at("rungs");
            csv += h.at("system").get<std::string>() + "," + h.at("label").get<std::string>() + "," +
                   h.at("word").get<std::string>() + "," + h.at("level").get<std::string>() + "," +
                   rg.at("diam-mean-equicontinuity-point").get<std::string>() + "," +
                   rg.at("mean-equicontinuous+frequently-stable").get<std::string>() + "," +
                   rg.at("mean-equicontinuous").get<std::string>() + "," + h.at("sensitivity").get<std::string>() +
                   "," + (h.at("dichotomy_consistent").get<bool>() ? "true" : "false") + "\n";
        }
        io::write_text(root / "summary.csv", csv);
    }
    return summary;
}

std::string summary_table(const RunSummary& summary) {
    std::ostringstream os;
    if (!summary.hierarchy.empty()) {
        os << "system            level                                   sensitivity          consistent\n";
        for (const auto& h : summary.hierarchy) {
            std::string sys = h.at("system").get<std::string>();
            std::string lvl = h.at("level").get<std::string>();
            std::string sen = h.at("sensitivity").get<std::string>();
            sys.resize(std::max<std::size_t>(sys.size(), 18), ' ');
            lvl.resize(std::max<std::size_t>(lvl.size(), 40), ' ');
            sen.resize(std::max<std::size_t>(sen.size(), 21), ' ');
            os << sys << lvl << sen << (h.at("dichotomy_consistent").get<bool>() ? "yes" : "NO") << "\n";
        }
    }
    bool header = false;
    for (const auto& r : summary.rows) {
        if (!r.a_ratio) continue;
        if (!header) {
            os << "system            test          N            a_N        a_N/N\n";
            header = true;
        }
        std::string sys = r.system, test = r.test;
        sys.resize(std::max<std::size_t>(sys.size(), 18), ' ');
        test.resize(std::max<std::size_t>(test.size(), 14), ' ');
        std::string nn = std::to_string(r.params.at("N").get<std::size_t>());
        std::string an = std::to_string(r.params.at("a_N").get<std::size_t>());
        nn.resize(std::max<std::size_t>(nn.size(), 13), ' ');
        an.resize(std::max<std::size_t>(an.size(), 11), ' ');
        os << sys << test << nn << an << io::format_double(*r.a_ratio) << "\n";
    }
    if (summary.hierarchy.empty() && !header) {
        for (const auto& r : summary.rows) {
            os << r.system << "  " << r.test << "  " << opt_number(r.statistic) << "  " << r.verdict << "\n";
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Presets

namespace {

const std::map<std::string, std::string>& preset_texts() {
    static const std::map<std::string, std::string> presets = {
        {"hierarchy-tour", R"({
  "schema_version": 1,
  "horizon": 65536,
  "depth_cap": 64,
  "output_dir": "hierarchy-tour",
  "systems": [
    {"name": "periodic", "generator": "periodic", "params": {"word": "001"}},
    {"name": "sturmian", "generator": "sturmian", "params": {"alpha": "golden", "theta": "0"}},
    {"name": "toeplitz", "generator": "toeplitz", "params": {"periods": [2, 4], "symbols": [0, 1]}},
    {"name": "paper_example", "generator": "paper_example", "params": {"i_max": 6}},
    {"name": "full_shift", "generator": "full_shift", "params": {"k": 2}}
  ],
  "tests": [
    {"test": "hierarchy", "systems": ["periodic", "full_shift"], "depth": 2},
    {"test": "hierarchy", "systems": ["sturmian", "toeplitz"], "depth": 32,
     "mean_eq_depths": [2, 4, 8, 16, 32, 64], "occ_limit": 2048},
    {"test": "hierarchy", "systems": ["paper_example"], "depth": 2, "N": 1198744, "occ_limit": 2048}
  ]
})"},
        {"paper-example", R"({
  "schema_version": 1,
  "depth_cap": 64,
  "output_dir": "paper-example",
  "systems": [
    {"name": "paper_example", "generator": "paper_example", "params": {"i_max": 6}}
  ],
  "tests": [
    {"test": "a_n", "i_first": 1, "i_last": 5},
    {"test": "diam_mean_avg", "depth": 2, "N": 1198744}
  ]
})"},
    };
    return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : preset_texts()) out.push_back(k);
    return out;
}

std::string preset_description(const std::string& name) {
    if (name == "hierarchy-tour") {
        return "periodic, Sturmian, Toeplitz, zero-block example and full shift through the stability ladder";
    }
    if (name == "paper-example") return "a_N table at N = p_2 .. p_6 for the zero-block example";
    return "";
}

json preset_config(const std::string& name) {
    const auto& p = preset_texts();
    const auto it = p.find(name);
    if (it == p.end()) throw ConfigError("", "unknown preset '" + name + "'");
    return json::parse(it->second);
}

}  // namespace symdyn::exp
