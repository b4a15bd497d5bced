use std::io::{self, Write};

use crate::domain::AbstractDomain;
use crate::model::SymbolicMdp;

use super::Pasg;

/// Plain-text dump of a graph, one record per line:
///
/// ```text
/// node n3 lc=(x=1, y=0) la=(x == 1) status=expanded target=false
/// edge n3 cmd=0 4/5->n7 1/5->n8
/// cover n9 -> n3
/// ```
pub fn write_debug<D: AbstractDomain, W: Write>(
    pasg: &Pasg<D::State>,
    model: &SymbolicMdp,
    domain: &D,
    out: &mut W,
) -> io::Result<()> {
    let names = model.var_names();
    for id in pasg.node_ids() {
        let n = pasg.node(id);
        writeln!(
            out,
            "node {id} lc=({}) la={} status={} target={}",
            model.show(&n.concrete),
            domain.to_expr(&n.label).display(&names),
            n.status.name(),
            n.target
        )?;
    }
    for e in &pasg.edges {
        write!(out, "edge {} cmd={}", e.source, e.command)?;
        for b in &e.branches {
            write!(out, " {}->{}", b.prob, b.target)?;
        }
        writeln!(out)?;
    }
    for (covered, coverer) in pasg.cover_edges() {
        writeln!(out, "cover {covered} -> {coverer}")?;
    }
    Ok(())
}
