#include "lgf/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace lgf {

namespace {

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
    T v{};
    const char* begin = value.data();
    const char* end = begin + value.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || value.empty()) {
        throw ConfigError("key '" + key + "': cannot parse integer from '" + value + "'");
    }
    return v;
}

double parse_real(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || value.empty()) {
        throw ConfigError("key '" + key + "': cannot parse number from '" + value + "'");
    }
    return v;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

const std::vector<std::string>& CliConfig::known_keys() {
    static const std::vector<std::string> keys = {
        "window_length", "stride", "corr_threshold", "lstm_hidden", "sage_dim", "sage_layers", "supernodes",
        "pool_levels", "alpha_pool", "lr", "batch", "epochs", "seed", "ablation", "gf_dim", "head_hidden", "threads",
        "synth_classes", "synth_variables", "synth_runs_per_class", "synth_run_length",
        "schema_label", "schema_run", "schema_ignore", "schema_variables", "out_dir"};
    return keys;
}

void CliConfig::set(const std::string& key, const std::string& value) {
    if (key == "window_length") {
        train.window_length = parse_integer<std::size_t>(key, value);
    } else if (key == "stride") {
        train.stride = parse_integer<std::size_t>(key, value);
    } else if (key == "corr_threshold") {
        train.corr_threshold = parse_real(key, value);
    } else if (key == "lstm_hidden") {
        train.lstm_hidden = parse_integer<std::size_t>(key, value);
    } else if (key == "sage_dim") {
        train.sage_dim = parse_integer<std::size_t>(key, value);
    } else if (key == "sage_layers") {
        train.sage_layers = parse_integer<std::size_t>(key, value);
    } else if (key == "supernodes") {
        train.supernodes = parse_integer<std::size_t>(key, value);
    } else if (key == "pool_levels") {
        train.pool_levels = parse_integer<std::size_t>(key, value);
    } else if (key == "alpha_pool") {
        train.alpha_pool = parse_real(key, value);
    } else if (key == "lr") {
        train.lr = parse_real(key, value);
    } else if (key == "batch") {
        train.batch = parse_integer<std::size_t>(key, value);
    } else if (key == "epochs") {
        train.epochs = parse_integer<std::size_t>(key, value);
    } else if (key == "seed") {
        train.seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "ablation") {
        train.ablation = variant_from_string(value);
    } else if (key == "gf_dim") {
        train.gf_dim = parse_integer<std::size_t>(key, value);
    } else if (key == "head_hidden") {
        train.head_hidden = parse_integer<std::size_t>(key, value);
    } else if (key == "threads") {
        train.threads = parse_integer<std::size_t>(key, value);
    } else if (key == "synth_classes") {
        synth.classes = parse_integer<int>(key, value);
    } else if (key == "synth_variables") {
        synth.variables = parse_integer<int>(key, value);
    } else if (key == "synth_runs_per_class") {
        synth.runs_per_class = parse_integer<int>(key, value);
    } else if (key == "synth_run_length") {
        synth.run_length = parse_integer<int>(key, value);
    } else if (key == "schema_label") {
        schema.label_column = value;
    } else if (key == "schema_run") {
        schema.run_column = value;
    } else if (key == "schema_ignore") {
        schema.ignore_columns = split_list(value);
    } else if (key == "schema_variables") {
        schema.variable_columns = split_list(value);
    } else if (key == "out_dir") {
        out_dir = value;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

std::string CliConfig::resolved_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "window_length=" << train.window_length << "\n";
    os << "stride=" << train.stride << "\n";
    os << "corr_threshold=" << train.corr_threshold << "\n";
    os << "lstm_hidden=" << train.lstm_hidden << "\n";
    os << "sage_dim=" << train.sage_dim << "\n";
    os << "sage_layers=" << train.sage_layers << "\n";
    os << "supernodes=" << train.supernodes << "\n";
    os << "pool_levels=" << train.pool_levels << "\n";
    os << "alpha_pool=" << train.alpha_pool << "\n";
    os << "lr=" << train.lr << "\n";
    os << "batch=" << train.batch << "\n";
    os << "epochs=" << train.epochs << "\n";
    os << "seed=" << train.seed << "\n";
    os << "ablation=" << to_string(train.ablation) << "\n";
    os << "gf_dim=" << train.gf_dim << "\n";
    os << "head_hidden=" << train.head_hidden << "\n";
    os << "threads=" << train.threads << "\n";
    os << "synth_classes=" << synth.classes << "\n";
    os << "synth_variables=" << synth.variables << "\n";
    os << "synth_runs_per_class=" << synth.runs_per_class << "\n";
    os << "synth_run_length=" << synth.run_length << "\n";
    os << "schema_label=" << schema.label_column << "\n";
    os << "schema_run=" << schema.run_column << "\n";
    std::string ignore;
    for (const std::string& c : schema.ignore_columns) ignore += (ignore.empty() ? "" : ",") + c;
    os << "schema_ignore=" << ignore << "\n";
    std::string vars;
    for (const std::string& c : schema.variable_columns) vars += (vars.empty() ? "" : ",") + c;
    os << "schema_variables=" << vars << "\n";
    os << "out_dir=" << out_dir << "\n";
    return os.str();
}

CliConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides,
                            const std::string& origin) {
    CliConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key=value, got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            cfg.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    for (const std::string& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + ov + "': expected key=value");
        }
        cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
    }
    return cfg;
}

CliConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::string text;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_config_text(text, overrides, path.empty() ? "<defaults>" : path);
}

}  // namespace lgf
