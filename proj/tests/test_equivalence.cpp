#include "cftc/equivalence.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cftc;

namespace {

EventRef ev( const std::string& port, EventKind kind = EventKind::value )
{
    return { port, kind };
}

const std::vector<Message> alphabet{ in_msg( "p", "1" ),  in_msg( "p", "2" ),  out_msg( "q", "0" ),
                                     out_msg( "q", "1" ), out_msg( "r", "0" ), in_msg( "s", "1" ) };

std::vector<Relation> relations()
{
    return {
        Relation::by_event( ev( "p", EventKind::exists ) ),
        Relation::by_event( ev( "p" ) ),
        Relation::by_clause( NegClause( std::vector{ ev( "p", EventKind::exists ), ev( "r" ) } ) ),
        Relation::by_clause_and_event( NegClause( std::vector{ ev( "p" ) } ), ev( "q" ) ),
        Relation::by_clause_and_event( NegClause( std::vector{ ev( "s", EventKind::exists ) } ),
                                       ev( "q", EventKind::exists ) ),
    };
}

Trace random_trace( std::mt19937_64& rng, std::size_t max_len )
{
    Trace t;
    const std::size_t n = rng() % ( max_len + 1 );
    for ( std::size_t i = 0; i < n; ++i )
        t.push_back( alphabet[rng() % alphabet.size()] );
    return t;
}

// Oracle: equal-length relevant projections that agree pointwise.
bool filter_oracle( const Trace& a, const Trace& b, const Relation& rel )
{
    const auto fa = filter_relevant( a, rel );
    const auto fb = filter_relevant( b, rel );
    if ( fa.size() != fb.size() )
        return false;
    for ( std::size_t i = 0; i < fa.size(); ++i )
        if ( !msg_equiv( fa[i], fb[i], rel ) )
            return false;
    return true;
}

} // namespace

TEST( MsgIrrelevant, Examples )
{
    EXPECT_TRUE( msg_irrelevant( out_msg( "r", "3" ), Relation::by_event( ev( "p", EventKind::exists ) ) ) );
    EXPECT_FALSE( msg_irrelevant( in_msg( "p", "1" ), Relation::by_event( ev( "p" ) ) ) );
    EXPECT_FALSE( msg_irrelevant( in_msg( "p", "1" ),
                                  Relation::by_clause( NegClause( std::vector{ ev( "p", EventKind::exists ), ev( "r" ) } ) ) ) );
}

TEST( MsgEquiv, Examples )
{
    EXPECT_TRUE( msg_equiv( in_msg( "p", "1" ), in_msg( "p", "2" ), Relation::by_event( ev( "p", EventKind::exists ) ) ) );
    EXPECT_FALSE( msg_equiv( in_msg( "p", "1" ), in_msg( "p", "2" ), Relation::by_event( ev( "p" ) ) ) );
    EXPECT_TRUE( msg_equiv( out_msg( "r", "0" ), out_msg( "s", "1" ), Relation::by_event( ev( "p" ) ) ) );
    EXPECT_FALSE( msg_equiv( in_msg( "p", "1" ), std::nullopt, Relation::by_event( ev( "p" ) ) ) );
    EXPECT_TRUE( msg_equiv( out_msg( "r", "0" ), std::nullopt, Relation::by_event( ev( "p" ) ) ) );
}

TEST( MsgEquiv, ClauseAndEventConjoinsBoth )
{
    const auto rel = Relation::by_clause_and_event( NegClause( std::vector{ ev( "p", EventKind::exists ) } ), ev( "q" ) );
    EXPECT_TRUE( msg_equiv( in_msg( "p", "1" ), in_msg( "p", "2" ), rel ) );
    EXPECT_FALSE( msg_equiv( out_msg( "q", "0" ), out_msg( "q", "1" ), rel ) );
    EXPECT_FALSE( msg_equiv( out_msg( "q", "0" ), in_msg( "p", "1" ), rel ) );
    EXPECT_EQ( rel.events(), ( std::vector{ ev( "p", EventKind::exists ), ev( "q" ) } ) );
}

TEST( TraceEquiv, Examples )
{
    for ( const auto& rel : relations() )
        EXPECT_TRUE( trace_equiv( {}, {}, rel ) );
    EXPECT_TRUE( trace_equiv( parse_trace( "r!0" ), {}, Relation::by_event( ev( "p" ) ) ) );
    EXPECT_FALSE( trace_equiv( parse_trace( "p?1.r!0" ), parse_trace( "p?2" ),
                               Relation::by_clause( NegClause( std::vector{ ev( "p" ) } ) ) ) );
}

TEST( FilterRelevant, Examples )
{
    const auto rel = Relation::by_event( ev( "p", EventKind::exists ) );
    EXPECT_TRUE( filter_relevant( {}, rel ).empty() );
    EXPECT_EQ( filter_relevant( parse_trace( "r!0.p?1" ), rel ), parse_trace( "p?1" ) );
    EXPECT_TRUE( filter_relevant( parse_trace( "r!0.q!1.s?1" ), rel ).empty() );
}

TEST( MsgEquiv, SymmetricAndReflexive )
{
    std::vector<MessageOrNone> all{ std::nullopt };
    for ( const auto& m : alphabet )
        all.push_back( m );
    for ( const auto& rel : relations() )
        for ( const auto& a : all ) {
            EXPECT_TRUE( msg_equiv( a, a, rel ) );
            for ( const auto& b : all )
                EXPECT_EQ( msg_equiv( a, b, rel ), msg_equiv( b, a, rel ) );
        }
}

TEST( TraceEquiv, AgreesWithFilterOracle )
{
    std::mt19937_64 rng( 5 );
    const auto rels = relations();
    for ( int i = 0; i < 2000; ++i ) {
        const auto& rel = rels[rng() % rels.size()];
        const auto a = random_trace( rng, 6 );
        auto b = random_trace( rng, 6 );
        if ( i % 3 == 0 ) {
            // Insert irrelevant noise into a copy so that positives occur.
            b = a;
            b.insert( b.begin() + static_cast<long>( rng() % ( b.size() + 1 ) ), out_msg( "r", "0" ) );
        }
        const auto c = random_trace( rng, 6 );
        const bool ab = trace_equiv( a, b, rel );
        ASSERT_EQ( ab, filter_oracle( a, b, rel ) ) << to_string( a ) << " vs " << to_string( b );
        ASSERT_EQ( ab, project( a, rel ) == project( b, rel ) );
        ASSERT_EQ( ab, trace_equiv( b, a, rel ) );
        ASSERT_TRUE( trace_equiv( a, a, rel ) );
        if ( ab && trace_equiv( b, c, rel ) ) {
            ASSERT_TRUE( trace_equiv( a, c, rel ) );
        }
    }
}

TEST( MsgIrrelevant, InputsIgnoreTheOutputEvent )
{
    for ( const auto& m : alphabet ) {
        if ( !m.is_input() )
            continue;
        for ( const auto& clause : { NegClause( std::vector{ ev( "p" ) } ), NegClause( std::vector{ ev( "s" ) } ),
                                     NegClause( std::vector{ ev( "r", EventKind::exists ) } ) } )
            for ( const auto& output : { ev( "q" ), ev( "q", EventKind::exists ), ev( "r" ) } )
                EXPECT_EQ( msg_irrelevant( m, Relation::by_clause_and_event( clause, output ) ),
                           msg_irrelevant( m, Relation::by_clause( clause ) ) );
    }
}

TEST( Project, ClassesKeepValuesOnlyForValueEvents )
{
    const auto rel = Relation::by_clause_and_event( NegClause( std::vector{ ev( "p", EventKind::exists ) } ), ev( "q" ) );
    const auto a = project( parse_trace( "p?1.r!0.q!1" ), rel );
    const auto b = project( parse_trace( "p?2.q!1" ), rel );
    EXPECT_EQ( a, b );
    EXPECT_NE( a, project( parse_trace( "p?2.q!0" ), rel ) );
}
