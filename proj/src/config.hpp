#pragma once

#include <string>

#include "pipeline.hpp"

namespace styleflow {

// Applies one key=value setting. Keys: T (alias steps), spi_n, alpha_c,
// alpha_s, blocks, guidance, prompt_content, prompt_style, seed (sets all
// three), seed_weights, seed_codec, seed_embedder, sgsa, spi, ca_adain, dfca,
// denoiser (toy|linear). Setting one alpha sets the other to its complement.
void apply_config_entry(StyleTransferConfig& cfg, const std::string& key,
                        const std::string& value);

// One key=value per line; '#' starts a comment; blank lines ignored.
void apply_config_text(StyleTransferConfig& cfg, const std::string& text);
void apply_config_file(StyleTransferConfig& cfg, const std::string& path);

}  // namespace styleflow
