#include "cftc/formula.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cftc;

namespace {

Formula lit( const std::string& port, EventKind kind = EventKind::value )
{
    return Formula::literal( { port, kind } );
}

EventRef ev( const std::string& port, EventKind kind = EventKind::value )
{
    return { port, kind };
}

std::vector<NegClause> clauses_of( std::initializer_list<std::vector<EventRef>> list )
{
    std::vector<NegClause> out;
    for ( const auto& c : list )
        out.emplace_back( c );
    return out;
}

// Truth-table oracle: the clause list, read as a DNF of negated events, is
// the negation of the formula.
bool renegation_matches( const Formula& f, const std::vector<NegClause>& cls )
{
    bool ok = true;
    for_each_assignment( f.events(), [&]( const Assignment& a ) {
        bool any = false;
        for ( const auto& c : cls ) {
            bool all = true;
            for ( const auto& e : c.events() )
                all = all && !a.at( e );
            any = any || all;
        }
        ok = ok && ( any == !eval( f, a ) );
    } );
    return ok;
}

Formula random_formula( std::mt19937_64& rng, std::size_t literals, std::size_t events )
{
    if ( literals <= 1 ) {
        const auto k = rng() % events;
        return lit( "x" + std::to_string( k / 2 ), k % 2 ? EventKind::value : EventKind::exists );
    }
    const std::size_t left = 1 + rng() % ( literals - 1 );
    std::vector<Formula> parts{ random_formula( rng, left, events ), random_formula( rng, literals - left, events ) };
    return rng() % 2 ? Formula::conj( parts ) : Formula::disj( parts );
}

} // namespace

TEST( Formula, PrintsWithParentheses )
{
    const auto f = Formula::disj( { lit( "p" ), Formula::conj( { lit( "r", EventKind::exists ), lit( "s" ) } ) } );
    EXPECT_EQ( to_string( f ), "p.value | (r.exists & s.value)" );
}

TEST( Formula, ParsesPrecedenceAndParentheses )
{
    const auto f = parse_formula( "p.value | r.exists & s.value" );
    EXPECT_EQ( f, Formula::disj( { lit( "p" ), Formula::conj( { lit( "r", EventKind::exists ), lit( "s" ) } ) } ) );
    const auto g = parse_formula( "(p.value | r.exists) & s.value" );
    EXPECT_EQ( g.op(), Formula::Op::conj );
    EXPECT_EQ( parse_formula( to_string( g ) ), g );
}

TEST( Formula, ParseErrorsCarryLocation )
{
    EXPECT_THROW( parse_formula( "" ), ParseError );
    EXPECT_THROW( parse_formula( "true" ), ParseError );
    EXPECT_THROW( parse_formula( "p.size" ), ParseError );
    EXPECT_THROW( parse_formula( "p.value |" ), ParseError );
    EXPECT_THROW( parse_formula( "(p.value" ), ParseError );
    try {
        parse_formula( "p.value & q.what", 3, 10 );
        FAIL();
    }
    catch ( const ParseError& e ) {
        EXPECT_EQ( e.line(), 3u );
        EXPECT_GT( e.column(), 10u );
    }
}

TEST( Formula, ConstantsRejected )
{
    try {
        parse_formula( "false" );
        FAIL();
    }
    catch ( const ParseError& e ) {
        EXPECT_NE( std::string( e.what() ).find( "constant formulas are not supported" ), std::string::npos );
    }
    EXPECT_THROW( Formula::conj( {} ), Error );
}

TEST( NegDnf, SingleLiteral )
{
    EXPECT_EQ( neg_dnf( lit( "a1" ) ), clauses_of( { { ev( "a1" ) } } ) );
}

TEST( NegDnf, Conjunction )
{
    EXPECT_EQ( neg_dnf( Formula::conj( { lit( "a1" ), lit( "a2" ) } ) ),
               clauses_of( { { ev( "a1" ) }, { ev( "a2" ) } } ) );
}

TEST( NegDnf, DisjunctionOverConjunction )
{
    const auto f = Formula::disj( { lit( "a1" ), Formula::conj( { lit( "a2" ), lit( "a3" ) } ) } );
    EXPECT_EQ( neg_dnf( f ), clauses_of( { { ev( "a1" ), ev( "a2" ) }, { ev( "a1" ), ev( "a3" ) } } ) );
    EXPECT_TRUE( renegation_matches( f, neg_dnf( f ) ) );
}

TEST( NegDnf, CanonicalFormDropsSubsumedClauses )
{
    // !(a | (a & b)) = !a, and (a & (a | b)) negates to !a | (!a & !b) = !a.
    EXPECT_EQ( neg_dnf( parse_formula( "a.value & (a.value | b.value)" ) ), clauses_of( { { ev( "a" ) } } ) );
    const auto cls = canonicalize( clauses_of( { { ev( "b" ), ev( "a" ) }, { ev( "a" ) }, { ev( "a" ) } } ) );
    EXPECT_EQ( cls, clauses_of( { { ev( "a" ) } } ) );
    EXPECT_EQ( to_string( NegClause( std::vector{ ev( "r", EventKind::exists ), ev( "p" ) } ) ), "!p.value&!r.exists" );
}

TEST( NegDnf, RandomFormulasRoundTripThroughTruthTable )
{
    std::mt19937_64 rng( 7 );
    for ( int i = 0; i < 300; ++i ) {
        const auto f = random_formula( rng, 1 + rng() % 6, 6 );
        const auto cls = neg_dnf( f );
        ASSERT_TRUE( renegation_matches( f, cls ) ) << to_string( f );
        ASSERT_EQ( cls, neg_dnf( f ) );
        ASSERT_EQ( cls, canonicalize( cls ) );
    }
}

TEST( Eval, Examples )
{
    const Assignment a{ { ev( "a1" ), true }, { ev( "a2" ), false }, { ev( "a3" ), false } };
    EXPECT_TRUE( eval( parse_formula( "a1.value | a2.value" ), a ) );
    EXPECT_FALSE( eval( parse_formula( "a1.value & a2.value" ), a ) );
    const Assignment none{ { ev( "a1" ), false }, { ev( "a2" ), false }, { ev( "a3" ), false } };
    EXPECT_FALSE( eval( parse_formula( "a1.value | (a2.value & a3.value)" ), none ) );
    EXPECT_THROW( eval( parse_formula( "b.value" ), a ), Error );
}

TEST( FormulasEquiv, Examples )
{
    EXPECT_TRUE( formulas_equiv( parse_formula( "a1.value | a2.value" ), parse_formula( "a2.value | a1.value" ) ) );
    EXPECT_TRUE( formulas_equiv( lit( "a1" ), Formula::conj( { lit( "a1" ), lit( "a1" ) } ) ) );
    EXPECT_FALSE( formulas_equiv( lit( "a1" ), lit( "a2" ) ) );
}

TEST( Substitute, Examples )
{
    const auto a1 = lit( "a1" );
    const auto a2 = lit( "a2" );
    const auto b1 = lit( "b1" );
    const auto b2 = lit( "b2" );
    EXPECT_EQ( substitute( Formula::disj( { a1, a2 } ), ev( "a2" ), Formula::conj( { b1, b2 } ) ),
               Formula::disj( { a1, Formula::conj( { b1, b2 } ) } ) );
    EXPECT_EQ( substitute( a1, ev( "a2" ), b1 ), a1 );
    EXPECT_EQ( substitute( Formula::conj( { a2, a2 } ), ev( "a2" ), b1 ), Formula::conj( { b1, b1 } ) );
}

TEST( SubstituteStrict, Examples )
{
    const auto a1 = lit( "a1" );
    const auto a2 = lit( "a2" );
    const auto b1 = lit( "b1" );
    const auto b2 = lit( "b2" );
    EXPECT_EQ( substitute_strict( Formula::disj( { a1, a2 } ), ev( "a2" ), b1 ),
               Formula::disj( { a1, Formula::conj( { a2, b1 } ) } ) );
    EXPECT_EQ( substitute_strict( a1, ev( "a2" ), b1 ), a1 );
    EXPECT_EQ( substitute_strict( a2, ev( "a2" ), Formula::disj( { b1, b2 } ) ),
               Formula::conj( { a2, Formula::disj( { b1, b2 } ) } ) );
}

TEST( SubstituteStrict, EntailsNonStrictWhenEventHolds )
{
    std::mt19937_64 rng( 11 );
    for ( int i = 0; i < 200; ++i ) {
        const auto p = random_formula( rng, 1 + rng() % 4, 4 );
        const auto q = random_formula( rng, 1 + rng() % 3, 4 );
        const auto events = p.events();
        const EventRef target = *std::next( events.begin(), static_cast<long>( rng() % events.size() ) );
        const auto strict = substitute_strict( p, target, q );
        const auto loose = substitute( p, target, q );
        auto all = strict.events();
        all.insert( target );
        for_each_assignment( all, [&]( const Assignment& a ) {
            if ( a.at( target ) && eval( strict, a ) ) {
                ASSERT_TRUE( eval( loose, a ) );
            }
        } );
    }
}
