# app/config.py
import os
from pathlib import Path
from dotenv import load_dotenv

# Carregar variáveis de ambiente
load_dotenv()

# Diretórios
BASE_DIR = Path(__file__).resolve().parent.parent
RESULTS_DIR = os.getenv("PIR_RESULTS_DIR", os.path.join(BASE_DIR, "results"))

# Configurações de aplicação
APP_TITLE = "Simulador de PIR em Sistemas de Replicação por Grafos"
APP_DESCRIPTION = "API para executar, analisar e verificar protocolos de recuperação privada de informação"
APP_VERSION = "1.0.0"

# Parâmetros padrão dos protocolos
DEFAULT_FIELD_Q = int(os.getenv("PIR_FIELD_Q", "5"))
DEFAULT_FILE_LENGTH = int(os.getenv("PIR_FILE_LENGTH", "4"))
DEFAULT_SEED = int(os.getenv("PIR_SEED", "0"))

# Limites das enumerações exaustivas
ENUMERATION_BUDGET = int(os.getenv("PIR_ENUMERATION_BUDGET", str(10**7)))
MAX_CYCLE_VERTICES = int(os.getenv("PIR_MAX_CYCLE_VERTICES", "14"))
LP_MAX_SERVERS = int(os.getenv("PIR_LP_MAX_SERVERS", "12"))

# Configurações de rede
NET_HOST = os.getenv("PIR_NET_HOST", "127.0.0.1")
NET_BASE_PORT = int(os.getenv("PIR_NET_BASE_PORT", "9100"))
NET_TIMEOUT_SECONDS = float(os.getenv("PIR_NET_TIMEOUT_SECONDS", "10"))
MAX_MESSAGE_SIZE = int(os.getenv("PIR_MAX_MESSAGE_SIZE", str(16 * 1024 * 1024)))

# Configurações de logging
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
