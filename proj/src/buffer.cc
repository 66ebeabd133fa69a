#include <map>
#include <stdexcept>

#include "qrsim/machine.h"

namespace qrsim {

std::string buffer_name(const std::string& connection) { return connection + "~"; }

std::vector<std::string> decode_queue(std::string_view label) {
    std::vector<std::string> out;
    if (label.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = label.find(',', start);
        out.emplace_back(label.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string encode_queue(const std::vector<std::string>& messages) {
    std::string out;
    for (std::size_t i = 0; i < messages.size(); ++i) out += (i ? "," : "") + messages[i];
    return out;
}

namespace {

// Queue register contents indexed by label: each queue as a list of message
// indices into the message space.
struct QueueCodec {
    std::vector<std::vector<std::uint32_t>> queues;
    std::map<std::vector<std::uint32_t>, std::uint32_t> index;
    std::vector<std::string> labels;
};

QueueCodec build_codec(const LabeledSpace& msgs, std::size_t cap) {
    QueueCodec codec;
    std::vector<std::uint32_t> nonempty;
    for (std::uint32_t i = 0; i < msgs.dim(); ++i)
        if (!msgs.label(i).empty()) nonempty.push_back(i);
    std::vector<std::vector<std::uint32_t>> layer{{}};
    for (std::size_t len = 0; len <= cap; ++len) {
        std::vector<std::vector<std::uint32_t>> next;
        for (const auto& q : layer) {
            codec.index[q] = static_cast<std::uint32_t>(codec.queues.size());
            codec.queues.push_back(q);
            std::vector<std::string> words;
            for (auto m : q) words.push_back(msgs.label(m));
            codec.labels.push_back(encode_queue(words));
            if (len < cap) {
                for (auto m : nonempty) {
                    auto longer = q;
                    longer.push_back(m);
                    next.push_back(std::move(longer));
                }
            }
        }
        layer = std::move(next);
    }
    return codec;
}

class BufferTransition : public Transition {
public:
    BufferTransition(std::string name, Port in, Port out, Port clock, SpacePtr msgs, std::size_t cap)
        : name_(std::move(name)), in_(std::move(in)), out_(std::move(out)), clock_(std::move(clock)),
          msgs_(std::move(msgs)), cap_(cap), codec_(build_codec(*msgs_, cap)), eps_(msgs_->index_of("")) {
        for (std::uint32_t i = 0; i < msgs_->dim(); ++i) natural_.push_back(parse_natural(msgs_->label(i)));
    }

    const std::vector<std::string>& queue_labels() const { return codec_.labels; }

    Factor apply(const Factor& m, const RegisterSlots& slots) const override {
        const std::size_t q = slots.q.at(0);
        const std::size_t in = slots.ports.at(in_), out = slots.ports.at(out_), clk = slots.ports.at(clock_);

        // Append a nonempty input to the queue.
        Factor f = factor_ops::apply_basis_map(
            m, [&](const BasisKey& k) { return BasisKey{k[in] == eps_ ? 0u : 1u}; },
            [&](BasisKey& k) {
                if (k[in] == eps_) return;
                auto queue = codec_.queues[k[q]];
                if (queue.size() >= cap_)
                    throw RunError("queue overflow on buffer " + name_ + " (capacity " + std::to_string(cap_) + ")");
                queue.push_back(k[in]);
                k[q] = codec_.index.at(queue);
                k[in] = eps_;
            });
        // Clear the out-port.
        f = factor_ops::reset(f, out, eps_);
        // Measure the clock input i and the queue length n; if i <= n move
        // message i to the out-port.
        return factor_ops::apply_basis_map(
            f,
            [&](const BasisKey& k) {
                return BasisKey{k[clk], static_cast<std::uint32_t>(codec_.queues[k[q]].size())};
            },
            [&](BasisKey& k) {
                const auto& i = natural_[k[clk]];
                auto queue = codec_.queues[k[q]];
                if (!i || *i == 0 || *i > queue.size()) return;
                k[out] = queue[*i - 1];
                queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(*i - 1));
                k[q] = codec_.index.at(queue);
            });
    }

private:
    std::string name_;
    Port in_, out_, clock_;
    SpacePtr msgs_;
    std::size_t cap_;
    QueueCodec codec_;
    std::uint32_t eps_;
    std::vector<std::optional<std::size_t>> natural_;
};

}  // namespace

MachinePtr make_buffer(const std::string& connection, std::size_t queue_cap, SpacePtr msg_space, int max_k) {
    if (queue_cap < 1) throw std::invalid_argument("queue capacity must be at least 1");
    if (!valid_port_name(connection)) throw std::invalid_argument("invalid connection name '" + connection + "'");
    if (!msg_space || !msg_space->contains("")) throw std::invalid_argument("message space must contain ε");
    auto b = std::make_shared<MachineDef>();
    b->name = buffer_name(connection);
    b->connection = connection;
    b->queue_cap = queue_cap;
    const Port in{connection, PortLabel::buffer, Direction::in};
    const Port out{connection, PortLabel::buffer, Direction::out};
    const Port clock{connection, PortLabel::clock, Direction::in};
    b->ports = {in, out, clock};
    b->cports = {clock};
    auto transition = std::make_shared<BufferTransition>(b->name, in, out, clock, msg_space, queue_cap);
    b->qregs = {make_space(transition->queue_labels())};
    std::vector<std::string> cstates;
    for (int k = 1; k <= max_k; ++k) cstates.push_back(ones(k));
    b->cregs = {make_space(cstates)};
    b->initial_q = {""};
    b->message_space = std::move(msg_space);
    b->origin = Origin::buffer;
    b->delta = std::move(transition);
    return b;
}

}  // namespace qrsim
