#include <gtest/gtest.h>

#include "qrsim/port.h"

namespace qrsim {
namespace {

const std::vector<std::string> kShapes = {"net!", "net?", "net-!", "net-?", "net<!", "net<?"};

TEST(Port, ParsesAndPrintsAllShapes) {
    for (const auto& text : kShapes) EXPECT_EQ(Port::parse(text).str(), text);
    const Port p = Port::parse("net<!");
    EXPECT_EQ(p.name, "net");
    EXPECT_TRUE(p.is_clock());
    EXPECT_TRUE(p.is_out());
}

TEST(Port, MasterClock) {
    EXPECT_EQ(Port::parse("clk<?"), kMasterClock);
    EXPECT_EQ(kMasterClock.str(), "clk<?");
}

TEST(Port, RejectsMalformedText) {
    for (const char* bad : {"", "!", "net", "net!!", "n et!", "net<>!", "-!"})
        EXPECT_THROW(Port::parse(bad), std::invalid_argument) << bad;
}

TEST(Port, ComplementExamples) {
    EXPECT_EQ(complement(Port::parse("net!")), Port::parse("net-?"));
    EXPECT_EQ(complement(Port::parse("net<!")), Port::parse("net<?"));
    EXPECT_EQ(complement(Port::parse("net?")), Port::parse("net-!"));
}

TEST(Port, ComplementIsAnInvolutionOnSixShapes) {
    std::set<Port> images;
    for (const auto& text : kShapes) {
        const Port p = Port::parse(text);
        EXPECT_EQ(complement(complement(p)), p);
        EXPECT_NE(complement(p), p);
        images.insert(complement(p));
    }
    EXPECT_EQ(images.size(), kShapes.size());
}

TEST(Port, NameRules) {
    EXPECT_TRUE(valid_port_name("net2"));
    EXPECT_FALSE(valid_port_name(""));
    EXPECT_FALSE(valid_port_name("a|b"));
}

TEST(Port, JoinIsSorted) {
    const auto s = to_set({Port::parse("b!"), Port::parse("a?")});
    EXPECT_EQ(join_ports(s), "a?, b!");
}

}  // namespace
}  // namespace qrsim
