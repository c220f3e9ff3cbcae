#pragma once

#include "cftc/component.hpp"
#include "cftc/formula.hpp"

#include <algorithm>
#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace cftc {

/// Event-equivalence relation on messages and traces, parameterised by a
/// single event, a clause, or a clause together with an output event.
class Relation
{
public:
    enum class Kind { by_event, by_clause, by_clause_and_event };

    static Relation by_event( EventRef event )
    {
        Relation r{ Kind::by_event };
        r.event_ = std::move( event );
        r.build();
        return r;
    }

    static Relation by_clause( NegClause clause )
    {
        Relation r{ Kind::by_clause };
        r.clause_ = std::move( clause );
        r.build();
        return r;
    }

    static Relation by_clause_and_event( NegClause clause, EventRef event )
    {
        Relation r{ Kind::by_clause_and_event };
        r.clause_ = std::move( clause );
        r.event_ = std::move( event );
        r.build();
        return r;
    }

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const NegClause& clause() const { return clause_; }
    [[nodiscard]] const std::optional<EventRef>& event() const { return event_; }

    /// The same relation without the output event.
    [[nodiscard]] Relation clause_only() const { return by_clause( clause_ ); }

    /// Every event the relation looks at, sorted and unique.
    [[nodiscard]] const std::vector<EventRef>& events() const { return events_; }

private:
    explicit Relation( Kind kind ) : kind_{ kind } {}

    void build()
    {
        events_ = clause_.events();
        if ( event_ )
            events_.push_back( *event_ );
        std::sort( events_.begin(), events_.end() );
        events_.erase( std::unique( events_.begin(), events_.end() ), events_.end() );
    }

    Kind kind_;
    NegClause clause_;
    std::optional<EventRef> event_;
    std::vector<EventRef> events_;
};

inline std::string to_string( const Relation& rel )
{
    switch ( rel.kind() ) {
    case Relation::Kind::by_event:
        return "event(" + to_string( *rel.event() ) + ")";
    case Relation::Kind::by_clause:
        return "clause(" + to_string( rel.clause() ) + ")";
    case Relation::Kind::by_clause_and_event:
        return "clause(" + to_string( rel.clause() ) + "),event(" + to_string( *rel.event() ) + ")";
    }
    return {};
}

/// `std::nullopt` plays the role of the irrelevance marker.
using MessageOrNone = std::optional<Message>;

namespace detail {

inline bool irrelevant_to( const MessageOrNone& m, const EventRef& e )
{
    return !m || m->port != e.port;
}

inline bool equiv_for_event( const MessageOrNone& m1, const MessageOrNone& m2, const EventRef& e )
{
    const bool i1 = irrelevant_to( m1, e );
    const bool i2 = irrelevant_to( m2, e );
    if ( i1 && i2 )
        return true;
    if ( i1 || i2 )
        return false;
    return e.kind == EventKind::exists || m1->value == m2->value;
}

} // namespace detail

inline bool msg_irrelevant( const Message& m, const Relation& rel )
{
    return std::all_of( rel.events().begin(), rel.events().end(),
                        [&]( const EventRef& e ) { return m.port != e.port; } );
}

inline bool msg_equiv( const MessageOrNone& m1, const MessageOrNone& m2, const Relation& rel )
{
    return std::all_of( rel.events().begin(), rel.events().end(),
                        [&]( const EventRef& e ) { return detail::equiv_for_event( m1, m2, e ); } );
}

/// Trace event-equivalence. Dynamic programme over suffix pairs following
/// the four cases: both empty, drop an irrelevant head on either side, or
/// match two equivalent heads.
inline bool trace_equiv( const Trace& t1, const Trace& t2, const Relation& rel )
{
    const std::size_t n1 = t1.size();
    const std::size_t n2 = t2.size();
    std::vector<char> irr1( n1 ), irr2( n2 );
    for ( std::size_t i = 0; i < n1; ++i )
        irr1[i] = msg_irrelevant( t1[i], rel );
    for ( std::size_t j = 0; j < n2; ++j )
        irr2[j] = msg_irrelevant( t2[j], rel );

    std::vector<char> table( ( n1 + 1 ) * ( n2 + 1 ), 0 );
    auto at = [&]( std::size_t i, std::size_t j ) -> char& { return table[i * ( n2 + 1 ) + j]; };
    for ( std::size_t i = n1 + 1; i-- > 0; ) {
        for ( std::size_t j = n2 + 1; j-- > 0; ) {
            if ( i == n1 && j == n2 ) {
                at( i, j ) = 1;
                continue;
            }
            bool ok = false;
            if ( i < n1 && irr1[i] && at( i + 1, j ) )
                ok = true;
            else if ( j < n2 && irr2[j] && at( i, j + 1 ) )
                ok = true;
            else if ( i < n1 && j < n2 && at( i + 1, j + 1 ) && msg_equiv( t1[i], t2[j], rel ) )
                ok = true;
            at( i, j ) = ok ? 1 : 0;
        }
    }
    return at( 0, 0 ) != 0;
}

inline Trace filter_relevant( const Trace& t, const Relation& rel )
{
    Trace out;
    for ( const auto& m : t )
        if ( !msg_irrelevant( m, rel ) )
            out.push_back( m );
    return out;
}

/// Equivalence class of a relevant message: its port, plus its value when
/// the relation tracks values on that port.
struct MsgClass
{
    std::string port;
    std::optional<std::string> value;

    friend auto operator<=>( const MsgClass&, const MsgClass& ) = default;
    friend bool operator==( const MsgClass&, const MsgClass& ) = default;
};

inline std::optional<MsgClass> classify( const Message& m, const Relation& rel )
{
    bool relevant = false;
    bool by_value = false;
    for ( const auto& e : rel.events() ) {
        if ( e.port != m.port )
            continue;
        relevant = true;
        by_value = by_value || e.kind == EventKind::value;
    }
    if ( !relevant )
        return std::nullopt;
    return MsgClass{ m.port, by_value ? std::optional<std::string>( m.value ) : std::nullopt };
}

/// Sequence of classes of the relevant messages of `t`. Two traces are
/// equivalent iff their projections are equal.
inline std::vector<MsgClass> project( const Trace& t, const Relation& rel )
{
    std::vector<MsgClass> out;
    for ( const auto& m : t )
        if ( auto cls = classify( m, rel ) )
            out.push_back( std::move( *cls ) );
    return out;
}

} // namespace cftc
