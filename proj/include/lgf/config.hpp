#pragma once

#include <map>
#include <string>
#include <vector>

#include "lgf/dataset.hpp"
#include "lgf/model.hpp"

namespace lgf {

// Full run configuration: the training keys plus data, schema, and synthesis
// settings. Every key is validated against the known set; unknown keys are
// errors, not warnings.
struct CliConfig {
    TrainConfig train;
    SynthConfig synth;
    CsvSchema schema;
    std::string out_dir = "out";

    static const std::vector<std::string>& known_keys();
    void set(const std::string& key, const std::string& value);  // throws ConfigError on unknown key/bad value
    std::string resolved_text() const;                           // key=value snapshot for reproducibility
};

// defaults <- file <- overrides, in that precedence order. The file is flat
// key=value, UTF-8, one pair per line, '#' starts a comment. overrides are
// "key=value" strings from the command line.
CliConfig parse_config(const std::string& path, const std::vector<std::string>& overrides);
CliConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides,
                            const std::string& origin = "<inline>");

}  // namespace lgf
