#include "cftc.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_refuted = 1;
constexpr int exit_usage = 2;

struct BoundOptions
{
    std::size_t depth = 4;
    std::size_t env_depth = 3;
    std::size_t max_offers = 2;
    std::optional<std::size_t> witness_depth;

    void add_to( CLI::App& cmd )
    {
        cmd.add_option( "--depth", depth, "Longest erroneous trace" )->capture_default_str();
        cmd.add_option( "--env-depth", env_depth, "Longest trace an environment reacts to" )->capture_default_str();
        cmd.add_option( "--max-offers", max_offers, "Largest offer set per trace" )->capture_default_str();
        cmd.add_option( "--witness-depth", witness_depth, "Longest correct trace searched (default depth + 2*states)" );
    }

    [[nodiscard]] cftc::Bounds bounds() const { return { depth, env_depth, max_offers, witness_depth }; }
};

std::string read_file( const std::string& path )
{
    std::ifstream in( path );
    if ( !in )
        throw cftc::Error( "cannot open '" + path + "'" );
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

cftc::Model load_model( const std::string& path )
{
    const auto text = read_file( path );
    try {
        return cftc::parse_model( text );
    }
    catch ( const cftc::ParseError& e ) {
        throw cftc::Error( path + ":" + e.what() );
    }
}

int run_dnf( const std::string& text )
{
    const auto formula = cftc::parse_formula( text );
    for ( const auto& clause : cftc::neg_dnf( formula ) )
        std::cout << "CLAUSE " << cftc::to_string( clause ) << "\n";
    return exit_ok;
}

int run_check( const std::string& model_path, const std::string& cft_name, const BoundOptions& opts,
               const std::string& format )
{
    const auto model = load_model( model_path );
    const auto& cft = model.cft( cft_name );
    const auto& comp = model.component( cft.owner );
    const auto verdicts =
        cftc::check_cft( comp, cft, opts.bounds(), cftc::Precondition::deterministic, cftc::job_count() );
    for ( const auto& v : verdicts )
        std::cout << ( format == "machine" ? cftc::machine_report( v ) : cftc::text_report( v ) );
    if ( format == "text" )
        std::cout << "CFT " << cft.name << ": "
                  << ( cftc::all_correct( verdicts ) ? "correct within bounds" : "refuted" ) << "\n";
    return cftc::all_correct( verdicts ) ? exit_ok : exit_refuted;
}

int run_compose( const std::string& model_path, const std::string& system, bool strict )
{
    const auto model = load_model( model_path );
    const auto spec = cftc::system_spec( model, system );
    cftc::Model out;
    out.components.push_back( cftc::composite_of( spec ) );
    out.cfts.push_back( cftc::composed_cft( spec, strict ) );
    std::cout << cftc::serialize_model( out );
    return exit_ok;
}

int run_simplify( const std::string& model_path, const std::string& cft_name, const BoundOptions& opts )
{
    const auto model = load_model( model_path );
    const auto& cft = model.cft( cft_name );
    const auto& comp = model.component( cft.owner );
    const auto bounds = opts.bounds();
    const auto verdicts = cftc::check_cft( comp, cft, bounds, cftc::Precondition::deterministic, cftc::job_count() );
    for ( const auto& v : verdicts ) {
        std::cout << cftc::machine_report( v );
        if ( !v.counterexample )
            continue;
        const auto rel = cftc::Relation::by_clause_and_event( v.clause, v.output );
        std::cout << "SIMPLIFIED clause=" << cftc::to_string( v.clause ) << "\n"
                  << cftc::dump_counterexample( cftc::simplify_counterexample( comp, *v.counterexample, rel, bounds ) );
    }
    return cftc::all_correct( verdicts ) ? exit_ok : exit_refuted;
}

int run_validate_model( const std::string& model_path, const std::string& system, const BoundOptions& opts )
{
    const auto model = load_model( model_path );
    const auto spec = cftc::system_spec( model, system, opts.bounds() );
    const auto report = cftc::validate_theorem_instance( spec, cftc::job_count() );
    std::cout << cftc::format_report( report );
    if ( report.status == cftc::TheoremStatus::premises_failed ) {
        const auto transfer = cftc::transfer_counterexamples( spec );
        std::cout << "TRANSFER " << transfer.transferred << "/" << transfer.counterexamples << "\n";
    }
    return report.status == cftc::TheoremStatus::violation ? exit_refuted : exit_ok;
}

int run_validate_random( std::size_t trials, std::uint64_t seed, const BoundOptions& opts )
{
    cftc::SystemParams params;
    params.bounds = opts.bounds();
    const auto result = cftc::run_campaign( seed, trials, params, cftc::job_count() );
    std::cout << cftc::format_campaign( result );
    const bool violated = result.count( cftc::TheoremStatus::violation ) > 0 || !result.transfer_holds();
    return violated ? exit_refuted : exit_ok;
}

} // namespace

int main( int argc, char** argv )
{
    CLI::App app{ "Component fault trees over input/output transition systems" };
    app.require_subcommand( 1 );

    std::string formula;
    auto* dnf = app.add_subcommand( "dnf", "Print the clauses of the negated formula" );
    dnf->add_option( "--formula", formula, "Formula text" )->required();

    std::string model_path;
    std::string cft_name;
    std::string format = "text";
    BoundOptions check_opts;
    auto* check = app.add_subcommand( "check", "Check a CFT against its component" );
    check->add_option( "--model", model_path, "Model file" )->required();
    check->add_option( "--cft", cft_name, "CFT name" )->required();
    check_opts.add_to( *check );
    check->add_option( "--format", format, "Output format" )
        ->check( CLI::IsMember( { "text", "machine" } ) )
        ->capture_default_str();

    std::string system;
    bool strict = false;
    auto* compose = app.add_subcommand( "compose", "Compose a system and print the result" );
    compose->add_option( "--model", model_path, "Model file" )->required();
    compose->add_option( "--system", system, "System name" )->required();
    compose->add_flag( "--strict", strict, "Use strict composition" );

    BoundOptions simplify_opts;
    auto* simplify = app.add_subcommand( "simplify", "Check a CFT and simplify its counterexamples" );
    simplify->add_option( "--model", model_path, "Model file" )->required();
    simplify->add_option( "--cft", cft_name, "CFT name" )->required();
    simplify_opts.add_to( *simplify );

    bool random = false;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    BoundOptions validate_opts;
    auto* validate = app.add_subcommand( "validate-theorem", "Validate the compositionality theorem" );
    auto* model_opt = validate->add_option( "--model", model_path, "Model file" );
    auto* system_opt = validate->add_option( "--system", system, "System name" );
    auto* random_opt = validate->add_flag( "--random", random, "Run a random campaign" );
    validate->add_option( "--trials", trials, "Number of random systems" )->capture_default_str();
    validate->add_option( "--seed", seed, "Seed of the first random system" )->capture_default_str();
    validate_opts.add_to( *validate );
    model_opt->needs( system_opt );
    system_opt->needs( model_opt );
    random_opt->excludes( model_opt );

    try {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError& e ) {
        const int code = app.exit( e );
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if ( *dnf )
            return run_dnf( formula );
        if ( *check )
            return run_check( model_path, cft_name, check_opts, format );
        if ( *compose )
            return run_compose( model_path, system, strict );
        if ( *simplify )
            return run_simplify( model_path, cft_name, simplify_opts );
        if ( *validate ) {
            if ( random )
                return run_validate_random( trials, seed, validate_opts );
            if ( model_path.empty() ) {
                std::cerr << "error: validate-theorem needs --model and --system, or --random\n";
                return exit_usage;
            }
            return run_validate_model( model_path, system, validate_opts );
        }
    }
    catch ( const cftc::Error& e ) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
