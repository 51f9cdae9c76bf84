#pragma once

// ModelGraph: an ordered set of named layers (instance-norm / conv / pool /
// upsample / concat) with weight tensors and wiring. Layers are appended in
// topological order; execution walks the list forward, backprop walks it in
// reverse. Weights serialize to the GLNW container.

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "glare/core.hpp"
#include "glare/nn/ops.hpp"
#include "glare/nn/tensor.hpp"

namespace glare {

enum class LayerKind { Input, InstanceNorm, Conv, MaxPool2, Upsample2, Concat };

struct GraphLayer {
    LayerKind kind = LayerKind::Input;
    std::string name;
    std::vector<int> inputs;  // upstream layer ids, all < own id
    int out_channels = 0;
    ConvParams conv;     // Conv only
    int input_port = -1; // Input only
};

class ModelGraph {
public:
    int add_input(const std::string& name, int channels) {
        GraphLayer l;
        l.kind = LayerKind::Input;
        l.name = name;
        l.out_channels = channels;
        l.input_port = input_ports_++;
        return append(std::move(l));
    }

    int add_instance_norm(const std::string& name, int input) {
        GraphLayer l;
        l.kind = LayerKind::InstanceNorm;
        l.name = name;
        l.inputs = {check_id(input)};
        l.out_channels = layers_[input].out_channels;
        return append(std::move(l));
    }

    int add_conv(const std::string& name, int input, int kernel, int out_channels,
                 Activation act) {
        GraphLayer l;
        l.kind = LayerKind::Conv;
        l.name = name;
        l.inputs = {check_id(input)};
        l.out_channels = out_channels;
        l.conv = ConvParams(ConvSpec{kernel, layers_[input].out_channels,
                                     out_channels, act});
        return append(std::move(l));
    }

    int add_maxpool2(const std::string& name, int input) {
        GraphLayer l;
        l.kind = LayerKind::MaxPool2;
        l.name = name;
        l.inputs = {check_id(input)};
        l.out_channels = layers_[input].out_channels;
        return append(std::move(l));
    }

    int add_upsample2(const std::string& name, int input) {
        GraphLayer l;
        l.kind = LayerKind::Upsample2;
        l.name = name;
        l.inputs = {check_id(input)};
        l.out_channels = layers_[input].out_channels;
        return append(std::move(l));
    }

    int add_concat(const std::string& name, const std::vector<int>& inputs) {
        GraphLayer l;
        l.kind = LayerKind::Concat;
        l.name = name;
        int ch = 0;
        for (int id : inputs) ch += layers_[check_id(id)].out_channels;
        l.inputs = inputs;
        l.out_channels = ch;
        return append(std::move(l));
    }

    void set_output(int id) { output_ = check_id(id); }
    int output() const { return output_; }
    int input_count() const { return input_ports_; }

    const std::vector<GraphLayer>& layers() const { return layers_; }
    GraphLayer& layer(int id) { return layers_[static_cast<size_t>(id)]; }
    const GraphLayer& layer(int id) const { return layers_[static_cast<size_t>(id)]; }
    int layer_count() const { return static_cast<int>(layers_.size()); }

    size_t parameter_count() const {
        size_t n = 0;
        for (const auto& l : layers_)
            if (l.kind == LayerKind::Conv) n += l.conv.parameter_count();
        return n;
    }

    // Inference pass; intermediate activations are released as soon as the
    // last consumer has run, which keeps the U-Net within budget on 4K input.
    Tensor3 forward(const std::vector<const Tensor3*>& inputs, int workers = 1) const {
        check_inputs(inputs);
        const int n = layer_count();
        std::vector<int> pending = consumer_counts();
        std::vector<Tensor3> store(static_cast<size_t>(n));
        std::vector<const Tensor3*> value(static_cast<size_t>(n), nullptr);

        for (int i = 0; i < n; ++i) {
            const GraphLayer& l = layers_[static_cast<size_t>(i)];
            if (l.kind == LayerKind::Input) {
                value[i] = inputs[static_cast<size_t>(l.input_port)];
            } else {
                store[i] = eval_layer(l, value, workers);
                value[i] = &store[i];
            }
            for (int j : l.inputs) {
                if (--pending[j] == 0 && j != output_) {
                    store[j] = Tensor3();
                    value[j] = nullptr;
                }
            }
        }
        if (output_ < 0) throw ConfigError("graph has no output");
        if (value[output_] != &store[output_]) return *value[output_];  // output is an input
        return std::move(store[output_]);
    }

    // Training pass: keeps every layer output alive for backward.
    std::vector<Tensor3> forward_cached(const std::vector<const Tensor3*>& inputs,
                                        int workers = 1) const {
        check_inputs(inputs);
        const int n = layer_count();
        std::vector<Tensor3> store(static_cast<size_t>(n));
        std::vector<const Tensor3*> value(static_cast<size_t>(n), nullptr);
        for (int i = 0; i < n; ++i) {
            const GraphLayer& l = layers_[static_cast<size_t>(i)];
            if (l.kind == LayerKind::Input)
                store[i] = *inputs[static_cast<size_t>(l.input_port)];
            else
                store[i] = eval_layer(l, value, workers);
            value[i] = &store[i];
        }
        return store;
    }

private:
    Tensor3 eval_layer(const GraphLayer& l, const std::vector<const Tensor3*>& value,
                       int workers) const {
        switch (l.kind) {
            case LayerKind::InstanceNorm:
                return instance_norm(*value[l.inputs[0]]);
            case LayerKind::Conv:
                return conv2d(*value[l.inputs[0]], l.conv, workers);
            case LayerKind::MaxPool2:
                return maxpool2(*value[l.inputs[0]]);
            case LayerKind::Upsample2:
                return upsample2(*value[l.inputs[0]]);
            case LayerKind::Concat: {
                std::vector<const Tensor3*> parts;
                parts.reserve(l.inputs.size());
                for (int j : l.inputs) parts.push_back(value[j]);
                return concat_channels(parts);
            }
            default:
                throw ConfigError("eval of input layer");
        }
    }

    void check_inputs(const std::vector<const Tensor3*>& inputs) const {
        if (static_cast<int>(inputs.size()) != input_ports_)
            throw ShapeError("graph expects " + std::to_string(input_ports_) +
                             " inputs, got " + std::to_string(inputs.size()));
        for (const auto& l : layers_)
            if (l.kind == LayerKind::Input &&
                inputs[static_cast<size_t>(l.input_port)]->channels != l.out_channels)
                throw ShapeError("input '" + l.name + "' expects " +
                                 std::to_string(l.out_channels) + " channels");
    }

    std::vector<int> consumer_counts() const {
        std::vector<int> counts(layers_.size(), 0);
        for (const auto& l : layers_)
            for (int j : l.inputs) ++counts[static_cast<size_t>(j)];
        return counts;
    }

    int check_id(int id) const {
        if (id < 0 || id >= layer_count())
            throw ConfigError("graph wiring references unknown layer id");
        return id;
    }

    int append(GraphLayer&& l) {
        layers_.push_back(std::move(l));
        return layer_count() - 1;
    }

    std::vector<GraphLayer> layers_;
    int output_ = -1;
    int input_ports_ = 0;
};

// Per-conv-layer weight/bias gradients, indexed by layer id.
struct GraphGradients {
    std::vector<std::vector<float>> dweights;
    std::vector<std::vector<float>> dbias;
    std::vector<Tensor3> dinputs;  // filled only when requested

    void accumulate(const GraphGradients& o) {
        for (size_t i = 0; i < dweights.size(); ++i) {
            for (size_t j = 0; j < dweights[i].size(); ++j)
                dweights[i][j] += o.dweights[i][j];
            for (size_t j = 0; j < dbias[i].size(); ++j)
                dbias[i][j] += o.dbias[i][j];
        }
    }

    void scale(float s) {
        for (auto& w : dweights)
            for (auto& v : w) v *= s;
        for (auto& b : dbias)
            for (auto& v : b) v *= s;
    }
};

inline GraphGradients graph_backward(const ModelGraph& graph,
                                     const std::vector<Tensor3>& cache,
                                     const Tensor3& d_output,
                                     bool want_input_grads = false,
                                     int workers = 1) {
    const int n = graph.layer_count();
    GraphGradients grads;
    grads.dweights.resize(static_cast<size_t>(n));
    grads.dbias.resize(static_cast<size_t>(n));
    if (want_input_grads)
        grads.dinputs.resize(static_cast<size_t>(graph.input_count()));

    std::vector<Tensor3> dnode(static_cast<size_t>(n));
    auto add_into = [](Tensor3& dst, const Tensor3& src) {
        if (dst.size() == 0) {
            dst = src;
            return;
        }
        for (size_t i = 0; i < dst.values.size(); ++i) dst.values[i] += src.values[i];
    };

    dnode[static_cast<size_t>(graph.output())] = d_output;
    for (int i = n - 1; i >= 0; --i) {
        const GraphLayer& l = graph.layer(i);
        Tensor3& dy = dnode[static_cast<size_t>(i)];
        if (dy.size() == 0) continue;  // no gradient flows here

        // A layer feeding only input nodes can skip its dx unless asked for.
        auto upstream_needs_dx = [&](int j) {
            return want_input_grads || graph.layer(j).kind != LayerKind::Input;
        };

        switch (l.kind) {
            case LayerKind::Input:
                if (want_input_grads)
                    add_into(grads.dinputs[static_cast<size_t>(l.input_port)], dy);
                break;
            case LayerKind::Conv: {
                const int j = l.inputs[0];
                Tensor3 dx;
                conv2d_backward(cache[static_cast<size_t>(j)], l.conv,
                                cache[static_cast<size_t>(i)], dy,
                                upstream_needs_dx(j) ? &dx : nullptr,
                                grads.dweights[static_cast<size_t>(i)],
                                grads.dbias[static_cast<size_t>(i)], workers);
                if (upstream_needs_dx(j)) add_into(dnode[static_cast<size_t>(j)], dx);
                break;
            }
            case LayerKind::InstanceNorm: {
                const int j = l.inputs[0];
                if (upstream_needs_dx(j)) {
                    Tensor3 dx = instance_norm_backward(cache[static_cast<size_t>(j)],
                                                        cache[static_cast<size_t>(i)], dy);
                    add_into(dnode[static_cast<size_t>(j)], dx);
                }
                break;
            }
            case LayerKind::MaxPool2: {
                const int j = l.inputs[0];
                if (upstream_needs_dx(j)) {
                    Tensor3 dx = maxpool2_backward(cache[static_cast<size_t>(j)], dy);
                    add_into(dnode[static_cast<size_t>(j)], dx);
                }
                break;
            }
            case LayerKind::Upsample2: {
                const int j = l.inputs[0];
                if (upstream_needs_dx(j)) {
                    Tensor3 dx = upsample2_backward(dy);
                    add_into(dnode[static_cast<size_t>(j)], dx);
                }
                break;
            }
            case LayerKind::Concat: {
                int ch0 = 0;
                for (int j : l.inputs) {
                    const Tensor3& part = cache[static_cast<size_t>(j)];
                    if (upstream_needs_dx(j)) {
                        Tensor3 dx(part.rows, part.cols, part.channels);
                        for (int r = 0; r < part.rows; ++r)
                            for (int c = 0; c < part.cols; ++c)
                                std::memcpy(dx.px(r, c), dy.px(r, c) + ch0,
                                            sizeof(float) * part.channels);
                        add_into(dnode[static_cast<size_t>(j)], dx);
                    }
                    ch0 += part.channels;
                }
                break;
            }
        }
        if (i != graph.output()) dy = Tensor3();  // release
    }
    return grads;
}

// ---------------------------------------------------------------------------
// GLNW container: magic "GLNW", version u32, record count u32, then per
// record: name length u32 + UTF-8 name, ndim u32 + dims, little-endian f32
// data. Conv layers contribute "<name>.weight" and "<name>.bias" records.

inline constexpr std::uint32_t kGlnwVersion = 1;

struct WeightRecord {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
};

namespace detail {

inline void write_u32_w(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

inline std::uint32_t read_u32_w(std::istream& in, const char* what) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (in.gcount() != 4) throw FormatError(std::string("GLNW: truncated ") + what);
    return v;
}

}  // namespace detail

inline void save_weights(const ModelGraph& graph, const std::string& path) {
    std::vector<WeightRecord> records;
    for (const auto& l : graph.layers()) {
        if (l.kind != LayerKind::Conv) continue;
        const auto& s = l.conv.spec;
        records.push_back(WeightRecord{
            l.name + ".weight",
            {static_cast<std::uint32_t>(s.kernel), static_cast<std::uint32_t>(s.kernel),
             static_cast<std::uint32_t>(s.in_channels),
             static_cast<std::uint32_t>(s.out_channels)},
            l.conv.weights});
        records.push_back(WeightRecord{
            l.name + ".bias", {static_cast<std::uint32_t>(s.out_channels)}, l.conv.bias});
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write: " + tmp);
        out.write("GLNW", 4);
        detail::write_u32_w(out, kGlnwVersion);
        detail::write_u32_w(out, static_cast<std::uint32_t>(records.size()));
        for (const auto& rec : records) {
            detail::write_u32_w(out, static_cast<std::uint32_t>(rec.name.size()));
            out.write(rec.name.data(), static_cast<std::streamsize>(rec.name.size()));
            detail::write_u32_w(out, static_cast<std::uint32_t>(rec.dims.size()));
            for (auto d : rec.dims) detail::write_u32_w(out, d);
            out.write(reinterpret_cast<const char*>(rec.data.data()),
                      static_cast<std::streamsize>(rec.data.size() * sizeof(float)));
        }
        if (!out) throw FormatError("short write: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw FormatError("cannot move output into place: " + path);
}

inline std::vector<WeightRecord> read_weight_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "GLNW", 4) != 0)
        throw FormatError("GLNW: bad magic in " + path);
    const std::uint32_t version = detail::read_u32_w(in, "header");
    if (version != kGlnwVersion)
        throw FormatError("GLNW: unsupported version in " + path);
    const std::uint32_t count = detail::read_u32_w(in, "header");

    std::vector<WeightRecord> records;
    records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        WeightRecord rec;
        const std::uint32_t name_len = detail::read_u32_w(in, "record name");
        rec.name.resize(name_len);
        in.read(rec.name.data(), name_len);
        if (in.gcount() != static_cast<std::streamsize>(name_len))
            throw FormatError("GLNW: truncated record name");
        const std::uint32_t ndim = detail::read_u32_w(in, "record dims");
        if (ndim == 0 || ndim > 8) throw FormatError("GLNW: bad rank");
        std::size_t total = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            rec.dims.push_back(detail::read_u32_w(in, "record dims"));
            total *= rec.dims.back();
        }
        rec.data.resize(total);
        in.read(reinterpret_cast<char*>(rec.data.data()),
                static_cast<std::streamsize>(total * sizeof(float)));
        if (in.gcount() != static_cast<std::streamsize>(total * sizeof(float)))
            throw FormatError("GLNW: truncated tensor data");
        records.push_back(std::move(rec));
    }
    return records;
}

// Fills an already-built graph; every record must match a conv layer tensor
// by name and shape, and every conv tensor must be covered. Returns the
// number of scalar values loaded.
inline size_t load_weights(ModelGraph& graph, const std::string& path) {
    std::vector<WeightRecord> records = read_weight_records(path);
    std::map<std::string, WeightRecord*> by_name;
    for (auto& rec : records) {
        if (by_name.count(rec.name))
            throw FormatError("GLNW: duplicate record '" + rec.name + "'");
        by_name[rec.name] = &rec;
    }

    size_t loaded = 0;
    size_t used = 0;
    for (int i = 0; i < graph.layer_count(); ++i) {
        GraphLayer& l = graph.layer(i);
        if (l.kind != LayerKind::Conv) continue;
        const auto& s = l.conv.spec;

        auto wit = by_name.find(l.name + ".weight");
        if (wit == by_name.end())
            throw FormatError("GLNW: missing tensor '" + l.name + ".weight'");
        const std::vector<std::uint32_t> wdims = {
            static_cast<std::uint32_t>(s.kernel), static_cast<std::uint32_t>(s.kernel),
            static_cast<std::uint32_t>(s.in_channels),
            static_cast<std::uint32_t>(s.out_channels)};
        if (wit->second->dims != wdims)
            throw FormatError("GLNW: shape mismatch for '" + l.name + ".weight'");
        l.conv.weights = wit->second->data;
        loaded += l.conv.weights.size();
        ++used;

        auto bit = by_name.find(l.name + ".bias");
        if (bit == by_name.end())
            throw FormatError("GLNW: missing tensor '" + l.name + ".bias'");
        if (bit->second->dims != std::vector<std::uint32_t>{
                static_cast<std::uint32_t>(s.out_channels)})
            throw FormatError("GLNW: shape mismatch for '" + l.name + ".bias'");
        l.conv.bias = bit->second->data;
        loaded += l.conv.bias.size();
        ++used;
    }
    if (used != records.size())
        throw FormatError("GLNW: file carries tensors unknown to this model");
    return loaded;
}

}  // namespace glare
