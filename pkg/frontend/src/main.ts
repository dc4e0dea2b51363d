import { bootstrap } from './ui.js';

document.addEventListener('DOMContentLoaded', () => bootstrap());
