#include "cftc/model.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace cftc;

namespace {

std::string read_fixtures()
{
    std::ifstream in( std::string( CFTC_MODELS_DIR ) + "/fixtures.model" );
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const std::string minimal = R"(component c {
  in p : {0,1};
  out q : {0,1};
  init s0;
  s0 -- p?0 --> s0;
  s0 -- p?1 --> s1;
  s1 -- q!1 --> s0;
}
cft f on c {
  output q.value;
  formula p.value | p.exists;
}
)";

// Expects a parse error at `line` whose message contains `fragment`.
void expect_error( const std::string& text, std::size_t line, const std::string& fragment )
{
    try {
        parse_model( text );
        FAIL() << "no error for: " << fragment;
    }
    catch ( const ParseError& e ) {
        EXPECT_EQ( e.line(), line ) << e.what();
        EXPECT_NE( std::string( e.what() ).find( fragment ), std::string::npos ) << e.what();
    }
}

std::string with_system( const std::string& body )
{
    return R"(component c {
  in p : {0,1};
  out q : {0,1};
  init s0;
}
component d {
  in b : {0,1};
  out p : {0,1};
  out t : {0};
  init s0;
}
cft fc on c {
  output q.value;
  formula p.value;
}
cft fd on d {
  output p.value;
  formula b.value;
}
system s {
)" + body + "}\n";
}

} // namespace

TEST( ParseModel, Minimal )
{
    const auto model = parse_model( minimal );
    ASSERT_EQ( model.components.size(), 1u );
    const auto& c = model.component( "c" );
    EXPECT_EQ( c.state_count(), 2u );
    EXPECT_EQ( c.state_name( c.initial() ), "s0" );
    EXPECT_TRUE( accepts_trace( c, parse_trace( "p?1.q!1.p?0" ) ) );
    const auto& f = model.cft( "f" );
    EXPECT_EQ( f.owner, "c" );
    EXPECT_EQ( f.output, ( EventRef{ "q", EventKind::value } ) );
    EXPECT_EQ( f.formula, parse_formula( "p.value | p.exists" ) );
    EXPECT_THROW( (void)model.cft( "g" ), Error );
}

TEST( ParseModel, CommentsAndWhitespace )
{
    const auto model = parse_model( "# header\n\n" + minimal + "  # trailing\n" );
    EXPECT_EQ( model, parse_model( minimal ) );
}

TEST( ParseModel, UndeclaredPortReportsLine )
{
    auto text = minimal;
    text.replace( text.find( "s1 -- q!1" ), 9, "s1 -- z!1" );
    expect_error( text, 7, "unknown port 'z'" );
}

TEST( ParseModel, StructuralErrors )
{
    expect_error( minimal + "component c {\n  init s0;\n}\n", 13, "duplicate name 'c'" );
    expect_error( minimal + "cft c on c {\n  output q.value;\n  formula p.value;\n}\n", 13, "duplicate name 'c'" );
    expect_error( "component c {\n  in p : {0};\n}\n", 1, "no init declaration" );
    expect_error( "component c {\n  in p : {0};\n  init s;\n  s -- p!0 --> s;\n}\n", 4, "direction mismatch" );
    expect_error( "component c {\n  in p : {0};\n  init s;\n  s -- p?1 --> s;\n}\n", 4, "not in domain" );
    expect_error( "component c {\n  in p : {0};\n  init s;\n", 4, "unterminated block" );
    expect_error( "cft f on nowhere {\n}\n", 1, "unknown component" );
    expect_error( minimal + "widget w {\n}\n", 13, "expected 'component', 'cft' or 'system'" );
}

TEST( ParseModel, SystemDeclaration )
{
    const auto model =
        parse_model( with_system( "  use c d;\n  connect d.p -> c.p;\n  bind p.value := fd;\n  check fc;\n" ) );
    const auto& sys = model.system( "s" );
    EXPECT_EQ( sys.c, "c" );
    EXPECT_EQ( sys.d, "d" );
    EXPECT_EQ( sys.connections, std::vector<std::string>{ "p" } );
    EXPECT_EQ( sys.bindings.at( EventRef{ "p", EventKind::value } ), "fd" );
    EXPECT_EQ( sys.check, "fc" );
}

TEST( ParseModel, SystemErrors )
{
    expect_error( with_system( "  connect d.p -> c.p;\n" ), 21, "connect before use" );
    expect_error( with_system( "  use c d;\n  connect c.p -> d.p;\n  check fc;\n" ), 22, "source must be component 'd'" );
    expect_error( with_system( "  use c d;\n  connect d.t -> c.p;\n  check fc;\n" ), 22,
                  "connected ports must share a name" );
    expect_error( with_system( "  use c d;\n  connect d.p -> c.p;\n  check fc;\n" ), 23, "unbound connected event" );
    expect_error( with_system( "  use c d;\n  connect d.p -> c.p;\n  bind p.exists := fd;\n  check fc;\n" ), 23,
                  "binding mismatch" );
    expect_error( with_system( "  use c d;\n  bind p.value := fd;\n  check fc;\n" ), 22, "not on a connected port" );
    expect_error( with_system( "  use c d;\n  connect d.p -> c.p;\n  bind p.value := fd;\n  check fd;\n" ), 24,
                  "is not a CFT of component 'c'" );
    expect_error( with_system( "  use c d;\n" ), 20, "no check declaration" );
}

TEST( ParseModel, DomainMismatch )
{
    auto text = with_system( "  use c d;\n  connect d.p -> c.p;\n  bind p.value := fd;\n  check fc;\n" );
    text.replace( text.find( "out p : {0,1}" ), 13, "out p : {0,2}" );
    expect_error( text, 22, "domain mismatch on port 'p'" );
}

TEST( ParseModel, FixturesRoundTrip )
{
    const auto model = parse_model( read_fixtures() );
    EXPECT_EQ( model.components.size(), 6u );
    EXPECT_EQ( model.cfts.size(), 7u );
    EXPECT_EQ( model.systems.size(), 4u );
    const auto text = serialize_model( model );
    const auto again = parse_model( text );
    EXPECT_EQ( again, model );
    EXPECT_EQ( serialize_model( again ), text );
}

TEST( SerializeComponent, ReparsesToSameComponent )
{
    const auto model = parse_model( minimal );
    const auto text = serialize_component( model.component( "c" ) );
    EXPECT_EQ( parse_model( text ).component( "c" ), model.component( "c" ) );
}
