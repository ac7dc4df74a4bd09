#pragma once

#include <string>
#include <vector>

#include "bfssl/mlp.hpp"

namespace bfssl {

// Versioned text checkpoint holding named flat parameter vectors. Values are
// written as C hexfloats so a save/load round trip is bit-exact.
struct CheckpointSection {
    std::string name;
    std::string meta;  // free-form, e.g. "dims=4,64,8 acts=relu,identity"
    std::vector<double> values;
};

struct Checkpoint {
    std::vector<CheckpointSection> sections;

    void add(std::string name, std::string meta, std::vector<double> values);
    const CheckpointSection* find(const std::string& name) const;
    // Throws internal_error when the section is missing.
    const CheckpointSection& require(const std::string& name) const;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);  // throws on bad magic/version
};

// Architecture string for a network section.
std::string net_meta(const MlpNet& net);

void add_net_section(Checkpoint& ckpt, const std::string& name, const MlpNet& net);

// Rebuilds the architecture from meta and loads the parameters. Throws
// internal_error on malformed meta or parameter count mismatch.
MlpNet net_from_section(const CheckpointSection& section);

}  // namespace bfssl
