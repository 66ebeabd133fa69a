#include "qrsim/port.h"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace qrsim {

bool valid_port_name(std::string_view name) {
    return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

Port Port::parse(std::string_view text) {
    Port p;
    if (text.size() < 2) throw std::invalid_argument("malformed port '" + std::string(text) + "'");
    const char last = text.back();
    if (last == '!')
        p.dir = Direction::out;
    else if (last == '?')
        p.dir = Direction::in;
    else
        throw std::invalid_argument("port '" + std::string(text) + "' must end in '!' or '?'");
    text.remove_suffix(1);
    if (text.back() == '-') {
        p.label = PortLabel::buffer;
        text.remove_suffix(1);
    } else if (text.back() == '<') {
        p.label = PortLabel::clock;
        text.remove_suffix(1);
    }
    if (!valid_port_name(text)) throw std::invalid_argument("invalid port name '" + std::string(text) + "'");
    p.name = std::string(text);
    return p;
}

std::string Port::str() const {
    std::string out = name;
    if (label == PortLabel::buffer) out += '-';
    if (label == PortLabel::clock) out += '<';
    out += dir == Direction::out ? '!' : '?';
    return out;
}

Port complement(const Port& p) {
    Port c = p;
    switch (p.label) {
        case PortLabel::simple:
            c.label = PortLabel::buffer;
            c.dir = p.dir == Direction::out ? Direction::in : Direction::out;
            break;
        case PortLabel::buffer:
            c.label = PortLabel::simple;
            c.dir = p.dir == Direction::out ? Direction::in : Direction::out;
            break;
        case PortLabel::clock:
            c.dir = p.dir == Direction::out ? Direction::in : Direction::out;
            break;
    }
    return c;
}

std::set<Port> to_set(const std::vector<Port>& ports) { return {ports.begin(), ports.end()}; }

std::string join_ports(const std::set<Port>& ports) {
    std::string out;
    for (const auto& p : ports) {
        if (!out.empty()) out += ", ";
        out += p.str();
    }
    return out;
}

}  // namespace qrsim
