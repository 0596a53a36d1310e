//! Graphviz export. Ports are record fields; higher-order nodes are dashed.

use std::fmt::Write;

use crate::portgraph::{NodeClass, PortGraph};

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(c, '{' | '}' | '|' | '<' | '>' | '"' | '\\' | ' ') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

pub fn to_dot(g: &PortGraph) -> String {
    let mut out = String::from("graph G {\n  node [shape=record];\n");
    for (id, node) in g.nodes() {
        let ports: Vec<String> = g
            .ports(id)
            .map(|p| {
                let name = g.port_name(p).map(ToString::to_string).unwrap_or_default();
                format!("<p{}> {}", p.port, escape(&name))
            })
            .collect();
        let label = if ports.is_empty() {
            escape(&node.label)
        } else {
            format!("{{{}|{{{}}}}}", escape(&node.label), ports.join("|"))
        };
        let style = match node.class {
            NodeClass::Ho => ", style=dashed",
            NodeClass::Fo => "",
        };
        writeln!(out, "  {id} [label=\"{label}\"{style}];").expect("writing to a string");
    }
    for e in g.edges() {
        let (a, b) = e.endpoints();
        writeln!(out, "  {}:p{} -- {}:p{};", a.node, a.port, b.node, b.port).expect("writing to a string");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::signature::{NodeNameDecl, PSignature};

    #[test]
    fn renders_records_and_dashed_boxes() {
        let mut s = PSignature::new();
        s.insert(NodeNameDecl::fo_constant("imp_i", &["in_l", "p"])).unwrap();
        s.insert(NodeNameDecl::ho_variable("X", &["y"])).unwrap();
        let mut g = PortGraph::new(Arc::new(s));
        let a = g.add_fo("imp_i").unwrap();
        let x = g.add_ho("X").unwrap();
        g.connect(a, 2, x, 1).unwrap();
        let dot = to_dot(&g);
        assert!(dot.contains("n1 [label=\"{imp_i|{<p1> in_l|<p2> p}}\"];"));
        assert!(dot.contains("n2 [label=\"{X|{<p1> ?y}}\", style=dashed];"));
        assert!(dot.contains("n1:p2 -- n2:p1;"));
    }
}
