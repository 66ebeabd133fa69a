#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qrsim {

enum class PortLabel { simple, buffer, clock };
enum class Direction { in, out };

// Ports are written as name plus suffix: "p!" / "p?" for simple ports,
// "p-!" / "p-?" for buffer-side ports and "p<!" / "p<?" for clock ports.
struct Port {
    std::string name;
    PortLabel label = PortLabel::simple;
    Direction dir = Direction::in;

    static Port parse(std::string_view text);
    std::string str() const;

    bool is_in() const { return dir == Direction::in; }
    bool is_out() const { return dir == Direction::out; }
    bool is_clock() const { return label == PortLabel::clock; }
    bool is_simple() const { return label == PortLabel::simple; }
    bool is_buffer_side() const { return label == PortLabel::buffer; }

    friend auto operator<=>(const Port&, const Port&) = default;
    friend bool operator==(const Port&, const Port&) = default;
};

inline const Port kMasterClock{"clk", PortLabel::clock, Direction::in};

// Low-level complement: the port directly wired to `p` through its buffer.
Port complement(const Port& p);
bool valid_port_name(std::string_view name);
std::set<Port> to_set(const std::vector<Port>& ports);
std::string join_ports(const std::set<Port>& ports);

}  // namespace qrsim
