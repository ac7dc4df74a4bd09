#include "bfssl/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bfssl/errors.hpp"

namespace bfssl {

namespace {
constexpr const char* kMagic = "bfssl-checkpoint";
constexpr int kVersion = 1;
}  // namespace

void Checkpoint::add(std::string name, std::string meta, std::vector<double> values) {
    sections.push_back({std::move(name), std::move(meta), std::move(values)});
}

const CheckpointSection* Checkpoint::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

const CheckpointSection& Checkpoint::require(const std::string& name) const {
    const CheckpointSection* s = find(name);
    if (!s) throw internal_error("checkpoint: missing section '" + name + "'");
    return *s;
}

void Checkpoint::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw internal_error("checkpoint: cannot open '" + path + "' for writing");
    out << kMagic << " v" << kVersion << "\n";
    char buf[48];
    for (const auto& s : sections) {
        out << "section " << s.name << " " << s.values.size() << "\n";
        out << "meta " << s.meta << "\n";
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%a", s.values[i]);
            out << buf << ((i + 1) % 8 == 0 || i + 1 == s.values.size() ? "\n" : " ");
        }
    }
    out << "end\n";
    if (!out) throw internal_error("checkpoint: write to '" + path + "' failed");
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw internal_error("checkpoint: cannot open '" + path + "'");
    std::string word;
    in >> word;
    std::string version;
    in >> version;
    if (word != kMagic || version != "v" + std::to_string(kVersion))
        throw internal_error("checkpoint: bad magic or unsupported version in '" + path + "'");

    Checkpoint ckpt;
    while (in >> word) {
        if (word == "end") return ckpt;
        if (word != "section")
            throw internal_error("checkpoint: expected 'section', got '" + word + "'");
        CheckpointSection s;
        std::size_t count = 0;
        in >> s.name >> count;
        in >> word;  // "meta"
        if (word != "meta") throw internal_error("checkpoint: expected 'meta' line");
        std::getline(in, s.meta);
        if (!s.meta.empty() && s.meta.front() == ' ') s.meta.erase(0, 1);
        s.values.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            in >> word;
            char* endp = nullptr;
            s.values[i] = std::strtod(word.c_str(), &endp);
            if (endp == word.c_str())
                throw internal_error("checkpoint: malformed value in section '" + s.name + "'");
        }
        if (!in) throw internal_error("checkpoint: truncated section '" + s.name + "'");
        ckpt.sections.push_back(std::move(s));
    }
    throw internal_error("checkpoint: missing 'end' marker in '" + path + "'");
}

namespace {

const char* act_name(Act a) {
    switch (a) {
        case Act::identity: return "identity";
        case Act::relu: return "relu";
        case Act::tanh_act: return "tanh";
    }
    return "identity";
}

Act act_from_name(const std::string& s) {
    if (s == "identity") return Act::identity;
    if (s == "relu") return Act::relu;
    if (s == "tanh") return Act::tanh_act;
    throw internal_error("checkpoint: unknown activation '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace

std::string net_meta(const MlpNet& net) {
    std::ostringstream out;
    out << "dims=";
    for (std::size_t i = 0; i < net.dims().size(); ++i)
        out << (i ? "," : "") << net.dims()[i];
    out << " acts=";
    for (std::size_t i = 0; i < net.activations().size(); ++i)
        out << (i ? "," : "") << act_name(net.activations()[i]);
    return out.str();
}

void add_net_section(Checkpoint& ckpt, const std::string& name, const MlpNet& net) {
    ckpt.add(name, net_meta(net), net.params());
}

MlpNet net_from_section(const CheckpointSection& section) {
    std::vector<int> dims;
    std::vector<Act> acts;
    for (const std::string& field : split(section.meta, ' ')) {
        if (field.rfind("dims=", 0) == 0) {
            for (const std::string& d : split(field.substr(5), ','))
                dims.push_back(std::stoi(d));
        } else if (field.rfind("acts=", 0) == 0) {
            for (const std::string& a : split(field.substr(5), ','))
                acts.push_back(act_from_name(a));
        }
    }
    if (dims.size() < 2 || acts.size() != dims.size() - 1)
        throw internal_error("checkpoint: malformed architecture meta '" + section.meta + "'");
    MlpNet net(dims, acts);
    if (net.param_count() != section.values.size())
        throw internal_error("checkpoint: parameter count mismatch in section '" + section.name +
                             "'");
    net.set_params(section.values);
    return net;
}

}  // namespace bfssl
