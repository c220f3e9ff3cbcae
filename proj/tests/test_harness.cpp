#include "cftc/harness.hpp"
#include "cftc/model.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace cftc;

namespace {

const Model& fixtures()
{
    static const Model model = [] {
        std::ifstream in( std::string( CFTC_MODELS_DIR ) + "/fixtures.model" );
        std::stringstream buffer;
        buffer << in.rdbuf();
        return parse_model( buffer.str() );
    }();
    return model;
}

} // namespace

TEST( GenComponent, DeterministicAndSound )
{
    for ( std::uint64_t seed = 0; seed < 50; ++seed ) {
        const GenParams params{ 4, { "a", "b" }, { "o" }, 3, "g" };
        const auto c = gen_component( seed, params );
        EXPECT_EQ( c, gen_component( seed, params ) );
        EXPECT_TRUE( validate_deterministic( c ).empty() );
        EXPECT_LE( c.state_count(), 4u );
        EXPECT_EQ( c.state_name( c.initial() ), "s0" );
    }
}

TEST( GenComponent, SingleInputOnlyState )
{
    const auto c = gen_component( 5, { 1, { "a" }, {}, 2, "g" } );
    EXPECT_EQ( c.state_count(), 1u );
    EXPECT_TRUE( validate_deterministic( c ).empty() );
    EXPECT_TRUE( accepts_trace( c, parse_trace( "a?0.a?1.a?1" ) ) );
}

TEST( GenCft, RespectsPortDirections )
{
    for ( std::uint64_t seed = 0; seed < 50; ++seed ) {
        const auto c = gen_component( seed, { 3, { "a", "b" }, { "o", "r" }, 2, "g" } );
        const auto cft = gen_cft( seed, c );
        EXPECT_NO_THROW( validate_cft( cft, c ) );
        EXPECT_EQ( cft, gen_cft( seed, c ) );
        EXPECT_LE( cft.formula.events().size(), 4u );
    }
    const auto no_outputs = gen_component( 1, { 1, { "a" }, {}, 2, "g" } );
    try {
        gen_cft( 1, no_outputs );
        FAIL();
    }
    catch ( const Error& e ) {
        EXPECT_NE( std::string( e.what() ).find( "ungeneratable" ), std::string::npos );
    }
}

TEST( GenSystem, Deterministic )
{
    for ( std::uint64_t seed = 0; seed < 20; ++seed ) {
        const auto a = gen_system( seed );
        const auto b = gen_system( seed );
        EXPECT_EQ( a.c, b.c );
        EXPECT_EQ( a.d, b.d );
        EXPECT_EQ( a.cft_c, b.cft_c );
        EXPECT_EQ( a.cfts_d, b.cfts_d );
        EXPECT_EQ( a.name, "random_" + std::to_string( seed ) );
    }
}

TEST( Theorem, FixtureSystems )
{
    const auto emit = validate_theorem_instance( system_spec( fixtures(), "emit_echo" ) );
    EXPECT_EQ( emit.status, TheoremStatus::validated );
    EXPECT_TRUE( emit.premises_hold() );
    EXPECT_EQ( emit.composed.formula, parse_formula( "b.exists" ) );
    EXPECT_EQ( emit.composed_strict.formula, parse_formula( "p.value & b.exists" ) );

    const auto loose = validate_theorem_instance( system_spec( fixtures(), "loose" ) );
    EXPECT_EQ( loose.status, TheoremStatus::validated );

    const auto wrong = validate_theorem_instance( system_spec( fixtures(), "wrong" ) );
    EXPECT_EQ( wrong.status, TheoremStatus::premises_failed );
    EXPECT_FALSE( wrong.conclusion.has_value() );
}

TEST( Theorem, ReportFormat )
{
    const auto report = validate_theorem_instance( system_spec( fixtures(), "loose" ) );
    const auto text = format_report( report );
    EXPECT_EQ( text.rfind( "SYSTEM loose status=Validated strict=correct composite_deterministic=no blocked_handshakes=0\n",
                           0 ),
               0u )
        << text;
    EXPECT_NE( text.find( "CONCLUSION" ), std::string::npos );
}

TEST( Transfer, VacuousWithoutCounterexamples )
{
    const auto spec = system_spec( fixtures(), "emit_echo" );
    const auto t = transfer_counterexamples( spec );
    EXPECT_EQ( t.counterexamples, 0u );
    EXPECT_TRUE( t.holds() );
}

TEST( Transfer, WrongFixture )
{
    const auto t = transfer_counterexamples( system_spec( fixtures(), "wrong" ) );
    EXPECT_EQ( t.counterexamples, 1u );
    EXPECT_EQ( t.transferred, 1u );
}

TEST( Transfer, RandomSystems )
{
    for ( std::uint64_t seed = 200; seed < 230; ++seed )
        EXPECT_TRUE( transfer_property( gen_system( seed ) ) ) << seed;
}

TEST( ProductClauses, MatchDisjunctiveReading )
{
    for ( std::uint64_t seed = 0; seed < 100; ++seed ) {
        const auto spec = gen_system( seed );
        auto formula = spec.cft_c.formula;
        for ( const auto& [event, cft] : spec.cfts_d )
            formula = substitute( formula, event, Formula::disj( { Formula::literal( event ), cft.formula } ) );
        EXPECT_EQ( canonicalize( neg_dnf( formula ) ), product_clauses( spec.cft_c, spec.cfts_d ) ) << seed;
    }
}

TEST( ProductClauses, HoldsTriviallyWithoutBindings )
{
    const auto& cft = fixtures().cft( "echo_q" );
    EXPECT_TRUE( strict_clause_structure_holds( cft, {} ) );
    EXPECT_EQ( product_clauses( cft, {} ), clauses( cft ) );
}

TEST( Campaign, SmallRun )
{
    const auto result = run_campaign( 1, 12, {}, 2 );
    ASSERT_EQ( result.trials.size(), 12u );
    for ( std::size_t i = 0; i < result.trials.size(); ++i )
        EXPECT_EQ( result.trials[i].seed, 1 + i );
    EXPECT_EQ( result.count( TheoremStatus::violation ), 0u );
    EXPECT_TRUE( result.transfer_holds() );
    const auto text = format_campaign( result );
    EXPECT_EQ( text, format_campaign( run_campaign( 1, 12, {}, 1 ) ) );
    EXPECT_NE( text.find( "SUMMARY trials=12 " ), std::string::npos );
}
