# app/cli.py
import logging
import sys
from typing import Any, Dict, List, Optional

import click
from pydantic import ValidationError

from app.config import DEFAULT_FIELD_Q, DEFAULT_FILE_LENGTH, DEFAULT_SEED, LOG_FORMAT, LOG_LEVEL, NET_BASE_PORT, NET_HOST
from app.exceptions import PIRError
from app.models.schemas import ExperimentConfig, VerifyRequest
from app.net.client import load_endpoints
from app.net.server import run_server
from app.services.experiment_service import ExperimentService
from app.utils.file_utils import parse_vertex_set
from app.utils.json_utils import safe_json_dump, to_key_value_lines

logger = logging.getLogger(__name__)


def _emit(report: Dict[str, Any], output: Optional[str]) -> None:
    for line in to_key_value_lines(report):
        click.echo(line)
    if output:
        if safe_json_dump(report, output):
            logger.info(f"Relatório salvo em {output}")
        else:
            raise click.UsageError(f"Não foi possível gravar {output}")


def _parse_colluders(raw: str) -> List[int]:
    try:
        return parse_vertex_set(raw)
    except ValueError as e:
        raise click.UsageError(str(e))


def _build_config(**kwargs) -> ExperimentConfig:
    try:
        return ExperimentConfig(**kwargs)
    except ValidationError as e:
        raise click.UsageError(f"Configuração inválida: {e}")


class PirGroup(click.Group):
    """Converte erros de entrada em status 2 com diagnóstico em stderr"""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except PIRError as e:
            logger.debug("Falha detalhada", exc_info=True)
            raise click.UsageError(str(e), ctx=ctx)


def experiment_options(func):
    options = [
        click.option("--graph", required=True, help="Família (petersen, cycle(5), ...) ou arquivo de grafo"),
        click.option("--q", default=DEFAULT_FIELD_Q, show_default=True, type=int),
        click.option("--f", "f", default=DEFAULT_FILE_LENGTH, show_default=True, type=int),
        click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int),
        click.option("--dataset", default=None, help="Arquivo de dados (cabeçalho 'n f q')"),
        click.option("--protocol", type=click.Choice(["rep2", "repR", "reduced", "coded"]), default="rep2", show_default=True),
        click.option("--code", type=click.Choice(["rs", "parity", "repetition"]), default="rs", show_default=True),
        click.option("--N", "N", type=int, default=None),
        click.option("--K", "K", type=int, default=None),
        click.option("--partition", default=None, help="Partes separadas por ';', ex.: 1-4;5-8;9-12"),
        click.option("--girth", type=int, default=None, help="Para 'reduced': Ĝ_c sem ciclos de comprimento <= girth"),
        click.option("--reuse-randomness", is_flag=True, default=False),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _config_from(params: Dict[str, Any], output: Optional[str] = None) -> ExperimentConfig:
    keys = ["graph", "q", "f", "seed", "dataset", "protocol", "code", "N", "K", "partition", "girth", "reuse_randomness"]
    return _build_config(output=output, **{k: params[k] for k in keys})


@click.group(cls=PirGroup)
@click.option("--verbose", is_flag=True, help="Logs em nível DEBUG")
@click.pass_context
def cli(ctx: click.Context, verbose: bool) -> None:
    """Recuperação privada de informação em sistemas de replicação por grafos"""
    level = logging.DEBUG if verbose else getattr(logging, LOG_LEVEL, logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    ctx.obj = ExperimentService()


@cli.command()
@experiment_options
@click.option("--phi", "phis", type=int, multiple=True, required=True, help="Arquivo desejado (repetir para b > 1)")
@click.option("--endpoints", default=None, help="Arquivo com host:port por servidor; sem ele, execução em processo")
@click.option("--output", default=None, help="Salva o relatório em JSON")
@click.pass_obj
def retrieve(service: ExperimentService, phis, endpoints, output, **params) -> None:
    """Executa um protocolo de ponta a ponta"""
    config = _config_from(params, output)
    remote = load_endpoints(endpoints) if endpoints else None
    report, _ = service.run_retrieval(config, list(phis), remote)
    _emit(report.model_dump(), output)
    if not report.correct:
        sys.exit(1)


@cli.command()
@click.option("--graph", required=True)
@click.option("--q", default=DEFAULT_FIELD_Q, show_default=True, type=int)
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int)
@click.option("--colluders", required=True, help="Servidores coniventes, ex.: 1,2,5-7")
@click.option("--phi", type=int, required=True)
@click.option("--output", default=None)
@click.pass_obj
def analyze(service: ExperimentService, graph, q, seed, colluders, phi, output) -> None:
    """Ataque por posto de um conjunto conivente sobre uma consulta simulada"""
    config = _build_config(graph=graph, q=q, seed=seed)
    report = service.run_analysis(config, _parse_colluders(colluders), phi)
    verdict = "acyclic: perfect privacy" if report.acyclic else f"cyclic: {report.leakage_bits:.6g} bits leaked"
    _emit({"verdict": verdict, **report.to_dict()}, output)


@cli.command()
@click.option("--graph", required=True)
@click.option("--output", default=None)
@click.pass_obj
def bound(service: ExperimentService, graph, output) -> None:
    """Limitantes de taxa (δ/n, 2/s, PL fracionário) e taxa obtida"""
    _emit(service.bound(graph).to_dict(), output)


@cli.command()
@click.option("--graph", required=True)
@click.option("--q", default=3, show_default=True, type=int)
@click.option("--budget", type=int, default=None, help="Máximo de tuplas por enumeração")
@click.option("--samples", default=20, show_default=True, type=int)
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int)
@click.option("--output", default=None)
@click.pass_obj
def verify(service: ExperimentService, graph, q, budget, samples, seed, output) -> None:
    """Verificações exatas de privacidade e correção; status 1 se alguma falhar"""
    try:
        request = VerifyRequest(graph=graph, q=q, budget=budget, samples=samples, seed=seed)
    except ValidationError as e:
        raise click.UsageError(str(e))
    result = service.run_verification(request)
    report = {"graph": result["graph"], "q": result["q"], **result["checks"], "passed": result["passed"]}
    _emit(report, output)
    if not result["passed"]:
        sys.exit(1)


@cli.command()
@click.option("--q", default=3, show_default=True, type=int)
@click.option("--certify", is_flag=True, help="Confere todos os subconjuntos de t servidores")
@click.option("--budget", type=int, default=None)
@click.option("--csv", "csv_path", default=None)
@click.option("--xlsx", "xlsx_path", default=None)
@click.pass_obj
def table1(service: ExperimentService, q, certify, budget, csv_path, xlsx_path) -> None:
    """Linhas de Petersen e do bipartido completo da tabela de sistemas"""
    df = service.table1(certify=certify, q=q, budget=budget)
    for record in df.to_dict(orient="records"):
        click.echo(" ".join(to_key_value_lines(record)))
    service.export_table1(df, csv_path, xlsx_path)
    if certify and not bool(df["certified"].all()):
        sys.exit(1)


@cli.command()
@experiment_options
@click.option("--server", "server", type=int, required=True, help="Índice j do servidor (1..s)")
@click.option("--host", default=NET_HOST, show_default=True)
@click.option("--port", type=int, default=None, help=f"Padrão: {NET_BASE_PORT} + j")
@click.pass_obj
def serve(service: ExperimentService, server, host, port, **params) -> None:
    """Sobe o servidor j com o mesmo conteúdo que 'retrieve' geraria para a mesma configuração"""
    config = _config_from(params)
    _, contents, _, _ = service.prepare(config)
    if not 1 <= server <= len(contents):
        raise click.UsageError(f"Servidor {server} fora de [1, {len(contents)}]")
    run_server(contents[server - 1], host, port if port is not None else NET_BASE_PORT + server)


def main() -> None:
    cli(prog_name="pir")


if __name__ == "__main__":
    main()
